#include "vropt/gradient_table.hpp"

#include "vropt/errors.hpp"

namespace vropt {

GradientTable::GradientTable(int count, int dim) {
  if (count < 1) throw InvalidArgument("GradientTable: count must be >= 1");
  if (dim < 1) throw InvalidArgument("GradientTable: dim must be >= 1");
  entries_.assign(static_cast<std::size_t>(count), Point::Zero(dim));
  mean_ = Point::Zero(dim);
  resync_interval_ = 64LL * count;
}

void GradientTable::replace(int i, const Point& g) {
  if (i < 0 || i >= size()) throw InvalidArgument("GradientTable: index out of range");
  if (g.size() != dimension()) throw InvalidArgument("GradientTable: dimension mismatch");
  Point& slot = entries_[static_cast<std::size_t>(i)];
  mean_ += (g - slot) / static_cast<double>(size());
  slot = g;
  if (++updates_since_resync_ >= resync_interval_) resync();
}

void GradientTable::resync() {
  Point m = Point::Zero(dimension());
  for (const Point& e : entries_) m += e;
  mean_ = m / static_cast<double>(size());
  updates_since_resync_ = 0;
}

double GradientTable::mean_drift() const {
  Point m = Point::Zero(dimension());
  for (const Point& e : entries_) m += e;
  m /= static_cast<double>(size());
  return (mean_ - m).norm() / (1.0 + m.norm());
}

}  // namespace vropt
