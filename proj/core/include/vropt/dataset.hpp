#pragma once

#include <string>
#include <utility>
#include <vector>

#include "vropt/types.hpp"

namespace vropt {

// One sample in compressed form. Feature indices are 1-based as in the LIBSVM
// text format and strictly ascending; values may be any finite real.
struct SparseRow {
  std::vector<std::pair<int, double>> entries;

  double squared_norm() const {
    double s = 0.0;
    for (const auto& [idx, val] : entries) s += val * val;
    return s;
  }

  // <a_i, x> accumulated in entry order. The synthetic generator reuses this
  // so planted-model residuals cancel exactly.
  double dot(const Point& x) const {
    double s = 0.0;
    for (const auto& [idx, val] : entries) s += val * x[idx - 1];
    return s;
  }
};

enum class DatasetKind {
  kRegressionTargets,  // targets are arbitrary reals
  kBinaryLabels,       // targets are -1 or +1
};

// Immutable sample collection. Invariants (checked at construction): rows and
// targets have equal length, indices fit the declared dimension, binary
// targets are exactly -1 or +1.
class Dataset {
 public:
  Dataset(std::vector<SparseRow> rows, std::vector<double> targets, int dimension,
          DatasetKind kind);

  int size() const { return static_cast<int>(rows_.size()); }
  int dimension() const { return dimension_; }
  DatasetKind kind() const { return kind_; }
  const SparseRow& row(int i) const { return rows_[static_cast<std::size_t>(i)]; }
  double target(int i) const { return targets_[static_cast<std::size_t>(i)]; }
  const std::vector<SparseRow>& rows() const { return rows_; }
  const std::vector<double>& targets() const { return targets_; }

  double max_row_squared_norm() const;

  bool operator==(const Dataset& o) const;

 private:
  std::vector<SparseRow> rows_;
  std::vector<double> targets_;
  int dimension_;
  DatasetKind kind_;
};

// Contiguous equal shares: client i (0-based) gets rows [i*floor(M/n),
// (i+1)*floor(M/n)); the remainder at the tail is dropped.
std::vector<Dataset> partition_clients(const Dataset& ds, int n_clients);

// Shape metadata for the bundled benchmark-set registry.
struct DatasetMeta {
  std::string name;
  int size = 0;
  int dimension = 0;
};

}  // namespace vropt
