#include "vropt/dataset.hpp"

#include <cmath>

#include "vropt/errors.hpp"

namespace vropt {

Dataset::Dataset(std::vector<SparseRow> rows, std::vector<double> targets, int dimension,
                 DatasetKind kind)
    : rows_(std::move(rows)), targets_(std::move(targets)), dimension_(dimension), kind_(kind) {
  if (rows_.empty()) throw InvalidArgument("Dataset: no samples");
  if (rows_.size() != targets_.size())
    throw InvalidArgument("Dataset: rows/targets length mismatch");
  if (dimension_ < 1) throw InvalidArgument("Dataset: dimension must be >= 1");
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    int prev = 0;
    for (const auto& [idx, val] : rows_[r].entries) {
      if (idx <= prev)
        throw InvalidArgument("Dataset: feature indices must be strictly ascending (row " +
                              std::to_string(r) + ")");
      if (idx > dimension_)
        throw InvalidArgument("Dataset: feature index " + std::to_string(idx) +
                              " exceeds dimension " + std::to_string(dimension_));
      if (!std::isfinite(val))
        throw InvalidArgument("Dataset: non-finite feature value (row " + std::to_string(r) + ")");
      prev = idx;
    }
    if (!std::isfinite(targets_[r]))
      throw InvalidArgument("Dataset: non-finite target (row " + std::to_string(r) + ")");
    if (kind_ == DatasetKind::kBinaryLabels && targets_[r] != -1.0 && targets_[r] != 1.0)
      throw InvalidArgument("Dataset: binary label must be -1 or +1 (row " + std::to_string(r) +
                            ")");
  }
}

double Dataset::max_row_squared_norm() const {
  double m = 0.0;
  for (const auto& r : rows_) m = std::max(m, r.squared_norm());
  return m;
}

bool Dataset::operator==(const Dataset& o) const {
  if (dimension_ != o.dimension_ || kind_ != o.kind_ || rows_.size() != o.rows_.size())
    return false;
  if (targets_ != o.targets_) return false;
  for (std::size_t i = 0; i < rows_.size(); ++i)
    if (rows_[i].entries != o.rows_[i].entries) return false;
  return true;
}

std::vector<Dataset> partition_clients(const Dataset& ds, int n_clients) {
  if (n_clients < 1) throw InvalidArgument("partition_clients: need at least one client");
  if (n_clients > ds.size())
    throw InvalidArgument("partition_clients: more clients than samples");
  const int share = ds.size() / n_clients;
  std::vector<Dataset> out;
  out.reserve(static_cast<std::size_t>(n_clients));
  for (int c = 0; c < n_clients; ++c) {
    const int lo = c * share;
    std::vector<SparseRow> rows(ds.rows().begin() + lo, ds.rows().begin() + lo + share);
    std::vector<double> targets(ds.targets().begin() + lo, ds.targets().begin() + lo + share);
    out.emplace_back(std::move(rows), std::move(targets), ds.dimension(), ds.kind());
  }
  return out;
}

}  // namespace vropt
