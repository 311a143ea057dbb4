#include "vropt/bounds.hpp"

#include "vropt/errors.hpp"

namespace vropt {

namespace {
void check_bound_args(double delta0, double g0, long iterations) {
  if (!(delta0 >= 0.0)) throw InvalidArgument("theoretical bound: delta0 must be >= 0");
  if (!(g0 >= 0.0)) throw InvalidArgument("theoretical bound: g0 must be >= 0");
  if (iterations < 1) throw InvalidArgument("theoretical bound: need at least one iteration");
}
}  // namespace

BoundBreakdown theoretical_bound_breakdown(double delta0, double g0, const ParamSchedule& sched,
                                           long iterations) {
  check_bound_args(delta0, g0, iterations);
  BoundBreakdown out;
  for (long k = 0; k < iterations; ++k) out.eta_sum += sched.eta(k);
  out.descent_term = 2.0 * delta0 / out.eta_sum;

  const double n = sched.n();
  const double b0 = sched.batch0();
  const double b1 = sched.batch(1);
  const double lam1 = sched.lambda(1);
  const double eta0 = sched.eta(0);
  out.gamma0 = eta0 / (2.0 * lam1);
  out.alpha0 = 2.0 * n * lam1 * eta0 / (b1 * b1);
  if (sched.batch0() < sched.n()) {
    out.moment_term =
        (n - b0) * (4.0 * out.gamma0 + 2.0 * out.alpha0 * b0) * g0 / (n * b0 * out.eta_sum);
  }
  out.total = out.descent_term + out.moment_term;
  return out;
}

double theoretical_bound(double delta0, double g0, const ParamSchedule& sched, long iterations) {
  return theoretical_bound_breakdown(delta0, g0, sched, iterations).total;
}

BoundBreakdown theoretical_bound_dist_breakdown(double delta0, double g0,
                                                const DistSchedule& sched, long rounds) {
  check_bound_args(delta0, g0, rounds);
  BoundBreakdown out;
  for (long k = 0; k < rounds; ++k) out.eta_sum += sched.eta(k);
  out.descent_term = 2.0 * delta0 / out.eta_sum;

  const double nm = static_cast<double>(sched.n()) * sched.m();
  const double sb0 = static_cast<double>(sched.clients0()) * sched.batch0();
  const double sb1 = static_cast<double>(sched.clients_rest()) * sched.batch_rest();
  const double lam1 = sched.lambda(1);
  const double eta0 = sched.eta(0);
  // Full first round makes the moment term vanish; skipping it also avoids
  // the nm = 1 singularity in theta0.
  if (sb0 < nm) {
    out.theta0 = nm / ((nm - 1.0) * lam1) + 4.0 * nm * lam1 * sb0 / (sb1 * sb1);
    out.moment_term = (nm - sb0) * eta0 * out.theta0 * g0 / (nm * sb0 * out.eta_sum);
  }
  out.total = out.descent_term + out.moment_term;
  return out;
}

double theoretical_bound_dist(double delta0, double g0, const DistSchedule& sched, long rounds) {
  return theoretical_bound_dist_breakdown(delta0, g0, sched, rounds).total;
}

}  // namespace vropt
