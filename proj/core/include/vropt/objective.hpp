#pragma once

#include <memory>
#include <vector>

#include "vropt/dataset.hpp"
#include "vropt/types.hpp"

namespace vropt {

// Finite-sum objective f(x) = (1/n) sum_i f_i(x). Implementations expose the
// component view; value() and full_gradient() are plain index-order averages
// so they stay deterministic and cheap to reason about.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual int num_components() const = 0;
  virtual int dimension() const = 0;
  virtual double component_loss(int i, const Point& x) const = 0;
  virtual Point component_gradient(int i, const Point& x) const = 0;

  double value(const Point& x) const;
  Point full_gradient(const Point& x) const;

 protected:
  void check_component(int i) const;
  void check_point(const Point& x) const;
};

// Robust linear regression: f_i(x) = log(z^2/2 + 1) with z = b_i - <a_i, x>.
// The loss is bounded-curvature and nonconvex in z far from zero.
class RobustRegressionLoss : public Objective {
 public:
  explicit RobustRegressionLoss(std::shared_ptr<const Dataset> data);

  int num_components() const override { return data_->size(); }
  int dimension() const override { return data_->dimension(); }
  double component_loss(int i, const Point& x) const override;
  Point component_gradient(int i, const Point& x) const override;

  const Dataset& data() const { return *data_; }

 private:
  std::shared_ptr<const Dataset> data_;
};

// Squared-sigmoid binary loss with l2 term folded into every component:
// f_i(x) = (1 - 1/(1 + exp(-<a_i, x> b_i)))^2 + (lambda/2) ||x||^2.
// The exp argument is clamped to [-40, 40]; the loss is flat to double
// precision beyond that range.
class SigmoidSquaredLoss : public Objective {
 public:
  SigmoidSquaredLoss(std::shared_ptr<const Dataset> data, double l2);

  int num_components() const override { return data_->size(); }
  int dimension() const override { return data_->dimension(); }
  double component_loss(int i, const Point& x) const override;
  Point component_gradient(int i, const Point& x) const override;

  double l2() const { return l2_; }
  const Dataset& data() const { return *data_; }

 private:
  std::shared_ptr<const Dataset> data_;
  double l2_;
};

// Test family with analytically known curvature: f_i(x) =
// 0.5 (x - c_i)' A_i (x - c_i), A_i symmetric PSD. Used wherever an exact
// smoothness constant, minimizer, or optimal value is required.
class QuadraticComponents : public Objective {
 public:
  struct Component {
    Matrix a;
    Point center;
  };

  explicit QuadraticComponents(std::vector<Component> components);

  int num_components() const override { return static_cast<int>(components_.size()); }
  int dimension() const override { return dim_; }
  double component_loss(int i, const Point& x) const override;
  Point component_gradient(int i, const Point& x) const override;

  // max_i lambda_max(A_i), computed once at construction.
  double exact_smoothness() const { return smoothness_; }
  // Solves mean(A_i) x = mean(A_i c_i); requires the mean matrix to be
  // invertible (it is whenever any component is positive definite).
  Point minimizer() const;
  double min_value() const;

  const Component& component(int i) const { return components_[static_cast<std::size_t>(i)]; }

  // f_i(x) = 0.5 ||x - c_i||^2 for each supplied center.
  static QuadraticComponents spheres(std::vector<Point> centers);

 private:
  std::vector<Component> components_;
  int dim_;
  double smoothness_;
};

// Smoothness constant estimate used for theoretical stepsizes on data-driven
// objectives: 0.15405 * max_i ||a_i||^2 + l2. Rejects an all-zero design with
// no regularizer, where the estimate would degenerate to 0.
double estimate_smoothness(const Dataset& ds, double l2);

// Default l2 strength for the squared-sigmoid family when the caller asks for
// "auto": 0.15405e-6 * max_i ||a_i||^2.
double default_sigmoid_l2(const Dataset& ds);

// G0 = (1/n) sum_i ||grad f_i(x0)||^2, the initial second moment entering the
// convergence bounds.
double initial_gradient_second_moment(const Objective& obj, const Point& x0);

}  // namespace vropt
