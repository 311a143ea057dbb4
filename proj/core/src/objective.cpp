#include "vropt/objective.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "vropt/errors.hpp"

namespace vropt {

double Objective::value(const Point& x) const {
  check_point(x);
  const int n = num_components();
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += component_loss(i, x);
  return s / n;
}

Point Objective::full_gradient(const Point& x) const {
  check_point(x);
  const int n = num_components();
  Point g = Point::Zero(dimension());
  for (int i = 0; i < n; ++i) g += component_gradient(i, x);
  g /= n;
  return g;
}

void Objective::check_component(int i) const {
  if (i < 0 || i >= num_components())
    throw InvalidArgument("component index " + std::to_string(i) + " out of range");
}

void Objective::check_point(const Point& x) const {
  if (x.size() != dimension())
    throw InvalidArgument("point dimension " + std::to_string(x.size()) +
                          " does not match objective dimension " + std::to_string(dimension()));
}

RobustRegressionLoss::RobustRegressionLoss(std::shared_ptr<const Dataset> data)
    : data_(std::move(data)) {
  if (!data_) throw InvalidArgument("RobustRegressionLoss: null dataset");
}

double RobustRegressionLoss::component_loss(int i, const Point& x) const {
  check_component(i);
  check_point(x);
  const double z = data_->target(i) - data_->row(i).dot(x);
  return std::log(z * z / 2.0 + 1.0);
}

Point RobustRegressionLoss::component_gradient(int i, const Point& x) const {
  check_component(i);
  check_point(x);
  const double z = data_->target(i) - data_->row(i).dot(x);
  // d/dx log(z^2/2 + 1) = z/(z^2/2 + 1) * dz/dx, and dz/dx = -a_i.
  const double w = -z / (z * z / 2.0 + 1.0);
  Point g = Point::Zero(dimension());
  for (const auto& [idx, val] : data_->row(i).entries) g[idx - 1] = w * val;
  return g;
}

namespace {
constexpr double kSigmoidClamp = 40.0;

double clamped_logistic(double t) {
  t = std::clamp(t, -kSigmoidClamp, kSigmoidClamp);
  return 1.0 / (1.0 + std::exp(-t));
}
}  // namespace

SigmoidSquaredLoss::SigmoidSquaredLoss(std::shared_ptr<const Dataset> data, double l2)
    : data_(std::move(data)), l2_(l2) {
  if (!data_) throw InvalidArgument("SigmoidSquaredLoss: null dataset");
  if (data_->kind() != DatasetKind::kBinaryLabels)
    throw InvalidArgument("SigmoidSquaredLoss: needs -1/+1 labels");
  if (l2_ < 0.0) throw InvalidArgument("SigmoidSquaredLoss: negative l2 strength");
}

double SigmoidSquaredLoss::component_loss(int i, const Point& x) const {
  check_component(i);
  check_point(x);
  const double t = data_->row(i).dot(x) * data_->target(i);
  const double s = clamped_logistic(t);
  const double m = 1.0 - s;
  return m * m + 0.5 * l2_ * x.squaredNorm();
}

Point SigmoidSquaredLoss::component_gradient(int i, const Point& x) const {
  check_component(i);
  check_point(x);
  const double y = data_->target(i);
  const double t = data_->row(i).dot(x) * y;
  const double s = clamped_logistic(t);
  // d/dt (1 - s)^2 = -2 s (1 - s)^2.
  const double w = -2.0 * s * (1.0 - s) * (1.0 - s) * y;
  Point g = l2_ * x;
  for (const auto& [idx, val] : data_->row(i).entries) g[idx - 1] += w * val;
  return g;
}

QuadraticComponents::QuadraticComponents(std::vector<Component> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw InvalidArgument("QuadraticComponents: no components");
  dim_ = static_cast<int>(components_[0].a.rows());
  smoothness_ = 0.0;
  for (const auto& c : components_) {
    if (c.a.rows() != dim_ || c.a.cols() != dim_ || c.center.size() != dim_)
      throw InvalidArgument("QuadraticComponents: inconsistent shapes");
    if (!c.a.isApprox(c.a.transpose(), 1e-12))
      throw InvalidArgument("QuadraticComponents: matrix not symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> es(c.a, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (lo < -1e-10) throw InvalidArgument("QuadraticComponents: matrix not PSD");
    smoothness_ = std::max(smoothness_, hi);
  }
  if (smoothness_ <= 0.0)
    throw InvalidArgument("QuadraticComponents: all components are identically zero");
}

double QuadraticComponents::component_loss(int i, const Point& x) const {
  check_component(i);
  check_point(x);
  const auto& c = components_[static_cast<std::size_t>(i)];
  const Point r = x - c.center;
  return 0.5 * r.dot(c.a * r);
}

Point QuadraticComponents::component_gradient(int i, const Point& x) const {
  check_component(i);
  check_point(x);
  const auto& c = components_[static_cast<std::size_t>(i)];
  return c.a * (x - c.center);
}

Point QuadraticComponents::minimizer() const {
  Matrix mean_a = Matrix::Zero(dim_, dim_);
  Point rhs = Point::Zero(dim_);
  for (const auto& c : components_) {
    mean_a += c.a;
    rhs += c.a * c.center;
  }
  mean_a /= static_cast<double>(components_.size());
  rhs /= static_cast<double>(components_.size());
  Eigen::LDLT<Matrix> ldlt(mean_a);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw InvalidArgument("QuadraticComponents: mean matrix is not positive definite");
  return ldlt.solve(rhs);
}

double QuadraticComponents::min_value() const { return value(minimizer()); }

QuadraticComponents QuadraticComponents::spheres(std::vector<Point> centers) {
  if (centers.empty()) throw InvalidArgument("QuadraticComponents::spheres: no centers");
  const auto d = centers[0].size();
  std::vector<Component> comps;
  comps.reserve(centers.size());
  for (auto& c : centers)
    comps.push_back({Matrix::Identity(d, d), std::move(c)});
  return QuadraticComponents(std::move(comps));
}

double estimate_smoothness(const Dataset& ds, double l2) {
  if (l2 < 0.0) throw InvalidArgument("estimate_smoothness: negative l2 strength");
  const double m = ds.max_row_squared_norm();
  if (m == 0.0 && l2 == 0.0)
    throw InvalidArgument("estimate_smoothness: all rows are zero and l2 is zero");
  return 0.15405 * m + l2;
}

double default_sigmoid_l2(const Dataset& ds) {
  return 0.15405e-6 * ds.max_row_squared_norm();
}

double initial_gradient_second_moment(const Objective& obj, const Point& x0) {
  const int n = obj.num_components();
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += obj.component_gradient(i, x0).squaredNorm();
  return s / n;
}

}  // namespace vropt
