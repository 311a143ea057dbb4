#pragma once

#include <vector>

#include "vropt/types.hpp"

namespace vropt {

// Stored past gradients y_1..y_n plus their running mean. replace() keeps the
// mean current in O(d); the mean is recomputed exactly every 64 n entry
// updates (amortized O(d) per update) and after any full refresh, so
// accumulated rounding never matters.
class GradientTable {
 public:
  GradientTable(int count, int dim);

  int size() const { return static_cast<int>(entries_.size()); }
  int dimension() const { return static_cast<int>(mean_.size()); }
  const Point& entry(int i) const { return entries_[static_cast<std::size_t>(i)]; }
  const Point& mean() const { return mean_; }

  void replace(int i, const Point& g);
  // Recompute the mean from the entries in index order.
  void resync();

  // Worst-case relative drift of the running mean, for diagnostics and tests.
  double mean_drift() const;

 private:
  std::vector<Point> entries_;
  Point mean_;
  long long updates_since_resync_ = 0;
  long long resync_interval_;
};

}  // namespace vropt
