#include "vropt/trace.hpp"

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "vropt/errors.hpp"

namespace vropt {

namespace {

void append_real(std::string& out, double v) {
  std::array<char, 32> buf;
  std::snprintf(buf.data(), buf.size(), "%.17g", v);
  out += buf.data();
}

double parse_real(const std::string& tok, long line) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0') throw ParseError("bad real '" + tok + "'", line);
  return v;
}

long long parse_int(const std::string& tok, long line) {
  char* end = nullptr;
  const long long v = std::strtoll(tok.c_str(), &end, 10);
  if (end == tok.c_str() || *end != '\0') throw ParseError("bad integer '" + tok + "'", line);
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

constexpr const char* kHeader = "iter,paper_count,actual_count,grad_norm,objective,full_batch_event";

}  // namespace

std::string trace_to_csv(const Trace& trace) {
  std::string out = kHeader;
  if (trace.distributed) out += ",sampled_clients";
  out += '\n';
  for (const auto& r : trace.records) {
    out += std::to_string(r.iter);
    out += ',';
    out += std::to_string(r.paper_count);
    out += ',';
    out += std::to_string(r.actual_count);
    out += ',';
    append_real(out, r.grad_norm);
    out += ',';
    append_real(out, r.objective);
    out += ',';
    out += r.full_batch_event ? '1' : '0';
    if (trace.distributed) {
      out += ',';
      for (std::size_t i = 0; i < r.sampled_clients.size(); ++i) {
        if (i) out += ';';
        out += std::to_string(r.sampled_clients[i]);
      }
    }
    out += '\n';
  }
  if (trace.diverged) {
    out += "# diverged at iteration ";
    out += std::to_string(trace.diverged_at);
    out += '\n';
  }
  return out;
}

void write_trace_csv(const Trace& trace, std::ostream& out) { out << trace_to_csv(trace); }

void write_trace_csv_file(const Trace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << trace_to_csv(trace);
}

Trace parse_trace_csv(std::istream& in) {
  Trace trace;
  std::string line;
  long line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string marker = "# diverged at iteration ";
      if (line.rfind(marker, 0) == 0) {
        trace.diverged = true;
        trace.diverged_at = static_cast<long>(parse_int(line.substr(marker.size()), line_no));
      }
      continue;
    }
    if (!have_header) {
      if (line == kHeader) {
        trace.distributed = false;
      } else if (line == std::string(kHeader) + ",sampled_clients") {
        trace.distributed = true;
      } else {
        throw ParseError("unexpected trace header '" + line + "'", line_no);
      }
      have_header = true;
      continue;
    }
    const auto cells = split(line, ',');
    const std::size_t want = trace.distributed ? 7 : 6;
    if (cells.size() != want)
      throw ParseError("expected " + std::to_string(want) + " columns, got " +
                           std::to_string(cells.size()),
                       line_no);
    TraceRecord r;
    r.iter = static_cast<long>(parse_int(cells[0], line_no));
    r.paper_count = parse_int(cells[1], line_no);
    r.actual_count = parse_int(cells[2], line_no);
    r.grad_norm = parse_real(cells[3], line_no);
    r.objective = parse_real(cells[4], line_no);
    if (cells[5] != "0" && cells[5] != "1")
      throw ParseError("full_batch_event must be 0 or 1", line_no);
    r.full_batch_event = cells[5] == "1";
    if (trace.distributed && !cells[6].empty())
      for (const auto& tok : split(cells[6], ';'))
        r.sampled_clients.push_back(static_cast<int>(parse_int(tok, line_no)));
    trace.records.push_back(std::move(r));
  }
  if (!have_header) throw ParseError("empty trace file", line_no);
  return trace;
}

Trace parse_trace_csv_text(const std::string& text) {
  std::istringstream in(text);
  return parse_trace_csv(in);
}

Trace load_trace_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataNotFound("trace file '" + path + "' not found");
  Trace t = parse_trace_csv(in);
  t.label = std::filesystem::path(path).stem().string();
  return t;
}

}  // namespace vropt
