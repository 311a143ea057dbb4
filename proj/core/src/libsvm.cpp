#include "vropt/libsvm.hpp"

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "vropt/errors.hpp"

namespace vropt {

namespace {

double parse_real(const std::string& tok, long line, const char* what) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0')
    throw ParseError(std::string("bad ") + what + " '" + tok + "'", line);
  return v;
}

// %.17g round-trips every double exactly through strtod.
std::string format_real(double v) {
  std::array<char, 32> buf;
  std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return std::string(buf.data());
}

}  // namespace

Dataset parse_libsvm(std::istream& in, std::optional<int> dimension_override) {
  std::vector<SparseRow> rows;
  std::vector<double> labels;
  int max_index = 0;
  bool labels_binary = true;

  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;  // blank line
    const double label = parse_real(tok, line_no, "label");
    if (label != -1.0 && label != 0.0 && label != 1.0) labels_binary = false;

    SparseRow row;
    int prev_index = 0;
    while (ls >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == tok.size())
        throw ParseError("expected index:value, got '" + tok + "'", line_no);
      const std::string idx_s = tok.substr(0, colon);
      char* end = nullptr;
      const long idx = std::strtol(idx_s.c_str(), &end, 10);
      if (end == idx_s.c_str() || *end != '\0' || idx < 1)
        throw ParseError("bad feature index '" + idx_s + "'", line_no);
      if (idx <= prev_index)
        throw ParseError("feature indices must be strictly ascending", line_no);
      const double val = parse_real(tok.substr(colon + 1), line_no, "feature value");
      row.entries.emplace_back(static_cast<int>(idx), val);
      prev_index = static_cast<int>(idx);
      max_index = std::max(max_index, static_cast<int>(idx));
    }
    rows.push_back(std::move(row));
    labels.push_back(label);
  }

  if (rows.empty()) throw ParseError("no samples in input", line_no);

  int dim = dimension_override.value_or(max_index);
  if (dim < max_index)
    throw InvalidArgument("dimension override " + std::to_string(dim) +
                          " is smaller than max feature index " + std::to_string(max_index));
  if (dim < 1) throw ParseError("no features in input and no dimension override", line_no);

  const DatasetKind kind =
      labels_binary ? DatasetKind::kBinaryLabels : DatasetKind::kRegressionTargets;
  if (kind == DatasetKind::kBinaryLabels)
    for (double& l : labels)
      if (l == 0.0) l = -1.0;

  return Dataset(std::move(rows), std::move(labels), dim, kind);
}

Dataset parse_libsvm_text(const std::string& text, std::optional<int> dimension_override) {
  std::istringstream in(text);
  return parse_libsvm(in, dimension_override);
}

std::string serialize_libsvm(const Dataset& ds) {
  std::string out;
  for (int i = 0; i < ds.size(); ++i) {
    out += format_real(ds.target(i));
    for (const auto& [idx, val] : ds.row(i).entries) {
      out += ' ';
      out += std::to_string(idx);
      out += ':';
      out += format_real(val);
    }
    out += '\n';
  }
  return out;
}

std::vector<DatasetMeta> known_datasets() {
  return {
      {"a9a", 32561, 123},    {"abalone", 4177, 8},   {"mg", 1385, 6},
      {"mushrooms", 8124, 112}, {"phishing", 11055, 68}, {"pyrim", 74, 27},
      {"triazines", 186, 60}, {"w8a", 49749, 300},
  };
}

std::optional<DatasetMeta> known_dataset_meta(std::string_view name) {
  for (const auto& m : known_datasets())
    if (m.name == name) return m;
  return std::nullopt;
}

std::string data_directory() {
  if (const char* env = std::getenv("VROPT_DATA_DIR"); env && *env) return env;
  return "./data";
}

Dataset load_named_dataset(const std::string& name) {
  const std::string dir = data_directory();
  std::ifstream in(dir + "/" + name);
  if (!in) in.open(dir + "/" + name + ".txt");
  if (!in)
    throw DataNotFound("dataset '" + name + "' not found under " + dir +
                       " (set VROPT_DATA_DIR or run 'vropt datasets' for fetch instructions)");
  Dataset ds = parse_libsvm(in);
  if (const auto meta = known_dataset_meta(name)) {
    // Trailing all-zero features leave the max index short of the registry
    // dimension; widen quietly in that case, warn on any other mismatch.
    if (ds.dimension() < meta->dimension)
      ds = Dataset(ds.rows(), ds.targets(), meta->dimension, ds.kind());
    if (ds.size() != meta->size || ds.dimension() != meta->dimension)
      std::cerr << "warning: " << name << " has shape (" << ds.size() << ", " << ds.dimension()
                << "), expected (" << meta->size << ", " << meta->dimension << ")\n";
  }
  return ds;
}

}  // namespace vropt
