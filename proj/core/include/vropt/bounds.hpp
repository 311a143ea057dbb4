#pragma once

#include "vropt/schedule.hpp"

namespace vropt {

// Guaranteed ceiling on E ||grad f(x_hat)||^2 after K iterations, with x_hat
// drawn by the eta-weighted output rule. delta0 = f(x^0) - f*, g0 = the
// initial gradient second moment. The free constants are reported at their
// minimal admissible values gamma0 = eta0/(2 lambda1), alpha0 =
// 2 n lambda1 eta0 / b1^2.
struct BoundBreakdown {
  double total = 0.0;
  double descent_term = 0.0;  // 2 delta0 / sum eta
  double moment_term = 0.0;   // the G0 term; zero when the first batch is full
  double eta_sum = 0.0;
  double gamma0 = 0.0;
  double alpha0 = 0.0;
  double theta0 = 0.0;  // distributed only
};

BoundBreakdown theoretical_bound_breakdown(double delta0, double g0, const ParamSchedule& sched,
                                           long iterations);
double theoretical_bound(double delta0, double g0, const ParamSchedule& sched, long iterations);

BoundBreakdown theoretical_bound_dist_breakdown(double delta0, double g0,
                                                const DistSchedule& sched, long rounds);
double theoretical_bound_dist(double delta0, double g0, const DistSchedule& sched, long rounds);

}  // namespace vropt
