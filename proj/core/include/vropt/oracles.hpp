#pragma once

#include <functional>
#include <vector>

#include "vropt/objective.hpp"
#include "vropt/types.hpp"

namespace vropt::oracles {

// Everything here recomputes estimator quantities from first principles by
// enumerating every possible sampling outcome. None of it calls into the
// optimizer classes, so the two sides can check each other.

// Frozen algorithm state just before one update at iteration k: the current
// and previous iterates, the previous direction, and the stored-gradient
// table y^{k-1}.
struct EstimatorSnapshot {
  const Objective* objective = nullptr;
  Point x_curr, x_prev, v_prev;
  std::vector<Point> table;
  double lambda = 0.0;
  int batch = 0;
};

struct EnumerationReport {
  long long outcomes = 0;
  Point empirical_mean;
  double second_moment = 0.0;   // E ||v - grad f(x)||^2   (or the enumerated LHS)
  double rhs = 0.0;             // variance bound          (or the closed-form RHS)
  double max_deviation = 0.0;   // distance from the predicted identity value
  double slack() const { return rhs - second_moment; }
};

// Enumerates all C(n, b) minibatches. Checks the unbiasedness identity
//   E[v^k] = grad f(x^k) + (1 - lambda)(v^{k-1} - grad f(x^{k-1}))
// (max_deviation is the norm of the defect) and the variance bound
//   E||v^k - grad f(x^k)||^2 <= (1-lambda)^2 ||v^{k-1} - grad f(x^{k-1})||^2
//     + (2 L^2/b) ||x^k - x^{k-1}||^2
//     + (2 lambda^2/b)(1/n) sum_j ||grad f_j(x^{k-1}) - y_j||^2
// with smoothness the exact constant of the objective.
EnumerationReport exhaustive_estimator_moments(const EstimatorSnapshot& s, double smoothness);

// Gradient-table freshness after the update y_i <- grad f_i(x_next) on the
// sampled indices: enumerating all C(n, b) batches,
//   E[(1/n) sum_j ||grad f_j(x_next) - y_j^new||^2]
//     = (1 - b/n)(1/n) sum_j ||grad f_j(x_next) - y_j||^2  exactly.
// second_moment holds the enumerated left side, rhs the closed form,
// max_deviation their relative gap.
struct TableDriftSnapshot {
  const Objective* objective = nullptr;
  std::vector<Point> table;
  int batch = 0;
};
EnumerationReport exhaustive_table_drift(const TableDriftSnapshot& s, const Point& x_next);

// Federated analogue over all C(n, s) * C(m, b)^s outcomes of one round.
struct DistEstimatorSnapshot {
  std::vector<const Objective*> clients;     // n objectives of m components each
  Point x_curr, x_prev, v_prev;
  std::vector<std::vector<Point>> tables;    // y_{ij}^{k-1}
  double lambda = 0.0;
  int client_sample = 0;                     // s
  int batch = 0;                             // b
};
EnumerationReport exhaustive_dist_estimator_mean(const DistEstimatorSnapshot& s);

// Central differences, (f(x + h e_j) - f(x - h e_j)) / (2h).
Point finite_difference_gradient(const std::function<double(const Point&)>& f, const Point& x,
                                 double h);
Point finite_difference_component_gradient(const Objective& obj, int i, const Point& x, double h);

// Slack of the one-step descent relation
//   f(x') <= f(x) - (eta/2)||grad f(x)||^2 - (1/(2 eta) - L/2)||x' - x||^2
//             + (eta/2)||v - grad f(x)||^2
// for the update x' = x - eta v. Nonnegative (up to rounding) whenever L is a
// valid smoothness constant.
double descent_relation_gap(const Objective& obj, double smoothness, const Point& x,
                            const Point& x_next, const Point& v, double eta);

// Calls fn with every b-subset of {0..n-1} in lexicographic order. Throws
// InstanceTooLarge when C(n, b) exceeds max_outcomes.
void for_each_subset(int n, int b, const std::function<void(const std::vector<int>&)>& fn,
                     long long max_outcomes = 1000000);

}  // namespace vropt::oracles
