#include "vropt/schedule.hpp"

#include <cmath>

#include "vropt/errors.hpp"

namespace vropt {

int ceil_sqrt(long long v) {
  if (v < 1) throw InvalidArgument("ceil_sqrt: argument must be >= 1");
  long long r = static_cast<long long>(std::ceil(std::sqrt(static_cast<double>(v))));
  while (r * r < v) ++r;
  while (r > 1 && (r - 1) * (r - 1) >= v) --r;
  return static_cast<int>(r);
}

namespace {

constexpr double kEtaDen = 3.8284271247461903;  // 1 + sqrt(8)

void check_batch(int b, int n, const char* what) {
  if (b < 1 || b > n)
    throw InvalidArgument(std::string(what) + " must lie in [1, " + std::to_string(n) +
                          "], got " + std::to_string(b));
}

void check_lambda(double lam) {
  if (!(lam > 0.0) || lam > 1.0)
    throw InvalidArgument("lambda must lie in (0, 1], got " + std::to_string(lam));
}

void check_eta(double eta) {
  if (!(eta > 0.0) || !std::isfinite(eta))
    throw InvalidArgument("stepsize must be positive and finite");
}

double resolve_eta(double cap, const ScheduleExtras& extras, bool* theoretical) {
  double eta;
  if (extras.stepsize_override) {
    eta = *extras.stepsize_override;
    *theoretical = false;
  } else {
    if (!(extras.stepsize_scale > 0.0))
      throw InvalidArgument("stepsize scale must be positive");
    eta = extras.stepsize_scale * cap;
    *theoretical = extras.stepsize_scale <= 1.0;
  }
  check_eta(eta);
  return eta;
}

}  // namespace

ParamSchedule ParamSchedule::custom(int n, double eta, int b0, int b, double lambda_rest) {
  if (n < 1) throw InvalidArgument("schedule: n must be >= 1");
  check_batch(b0, n, "batch(0)");
  check_batch(b, n, "batch(k)");
  check_lambda(lambda_rest);
  check_eta(eta);
  ParamSchedule s;
  s.n_ = n;
  s.eta_ = eta;
  s.b0_ = b0;
  s.b_ = b;
  s.lambda_ = lambda_rest;
  s.preset_ = "custom";
  s.theoretical_ = false;
  return s;
}

double ParamSchedule::variance_factor() const {
  const double b = b_;
  const double n = n_;
  return 2.0 / (lambda_ * b) + 8.0 * lambda_ * n * n / (b * b * b);
}

double ParamSchedule::stepsize_cap(double smoothness) const {
  if (!(smoothness > 0.0)) throw InvalidArgument("smoothness constant must be positive");
  return 1.0 / (smoothness * (1.0 + std::sqrt(variance_factor())));
}

ParamSchedule schedule_preset(const std::string& name, int n, double smoothness,
                              const ScheduleExtras& extras) {
  if (n < 1) throw InvalidArgument("schedule_preset: n must be >= 1");
  if (!(smoothness > 0.0))
    throw InvalidArgument("schedule_preset: smoothness constant must be positive");

  const int b = ceil_sqrt(n);
  int b0;
  if (name == "cor1") {
    b0 = n;
  } else if (name == "cor2") {
    b0 = b;
  } else if (name == "cor3") {
    if (!extras.g0 || !extras.epsilon)
      throw InvalidArgument("preset cor3 needs g0 and epsilon");
    if (!(*extras.g0 >= 0.0) || !(*extras.epsilon > 0.0))
      throw InvalidArgument("preset cor3 needs g0 >= 0 and epsilon > 0");
    const double r = std::sqrt(static_cast<double>(n) * *extras.g0) / *extras.epsilon;
    b0 = static_cast<int>(std::min(static_cast<double>(n), std::max(1.0, std::ceil(r))));
  } else {
    throw InvalidArgument("unknown schedule preset '" + name + "'");
  }

  ParamSchedule s;
  s.n_ = n;
  s.b0_ = b0;
  s.b_ = b;
  // lambda = b/(2n) keeps the variance factor at 8 n / b^2 <= 8.
  s.lambda_ = static_cast<double>(b) / (2.0 * n);
  s.preset_ = name;
  s.eta_ = resolve_eta(1.0 / (kEtaDen * smoothness), extras, &s.theoretical_);
  return s;
}

DistSchedule DistSchedule::custom(int n, int m, double eta, int s0, int b0, int s, int b,
                                  double lambda_rest) {
  if (n < 1 || m < 1) throw InvalidArgument("dist schedule: n and m must be >= 1");
  check_batch(s0, n, "clients(0)");
  check_batch(s, n, "clients(k)");
  check_batch(b0, m, "batch(0)");
  check_batch(b, m, "batch(k)");
  check_lambda(lambda_rest);
  check_eta(eta);
  DistSchedule d;
  d.n_ = n;
  d.m_ = m;
  d.eta_ = eta;
  d.s0_ = s0;
  d.b0_ = b0;
  d.s_ = s;
  d.b_ = b;
  d.lambda_ = lambda_rest;
  d.preset_ = "custom";
  d.theoretical_ = false;
  return d;
}

double DistSchedule::variance_factor() const {
  const double sb = static_cast<double>(s_) * b_;
  const double nm = static_cast<double>(n_) * m_;
  return 2.0 / (lambda_ * sb) + 8.0 * lambda_ * nm * nm / (sb * sb * sb);
}

double DistSchedule::stepsize_cap(double smoothness) const {
  if (!(smoothness > 0.0)) throw InvalidArgument("smoothness constant must be positive");
  return 1.0 / (smoothness * (1.0 + std::sqrt(variance_factor())));
}

DistSchedule dist_schedule_preset(const std::string& name, int n, int m, double smoothness,
                                  const ScheduleExtras& extras) {
  if (n < 1 || m < 1) throw InvalidArgument("dist_schedule_preset: n and m must be >= 1");
  if (!(smoothness > 0.0))
    throw InvalidArgument("dist_schedule_preset: smoothness constant must be positive");

  const int s = ceil_sqrt(n);
  const int b = ceil_sqrt(m);
  int s0, b0;
  if (name == "cor1d") {
    s0 = n;
    b0 = m;
  } else if (name == "cor2d") {
    s0 = s;
    b0 = b;
  } else if (name == "cor3d") {
    if (!extras.g0 || !extras.epsilon)
      throw InvalidArgument("preset cor3d needs g0 and epsilon");
    if (!(*extras.g0 >= 0.0) || !(*extras.epsilon > 0.0))
      throw InvalidArgument("preset cor3d needs g0 >= 0 and epsilon > 0");
    const double r = std::sqrt(static_cast<double>(n) * *extras.g0 / m) / *extras.epsilon;
    s0 = static_cast<int>(std::min(static_cast<double>(n), std::max(1.0, std::ceil(r))));
    b0 = m;
  } else {
    throw InvalidArgument("unknown distributed schedule preset '" + name + "'");
  }

  DistSchedule d;
  d.n_ = n;
  d.m_ = m;
  d.s0_ = s0;
  d.b0_ = b0;
  d.s_ = s;
  d.b_ = b;
  // lambda = s b/(2 n m); the variance factor becomes 8 n m/(s b)^2 <= 8.
  d.lambda_ = static_cast<double>(s) * b / (2.0 * static_cast<double>(n) * m);
  d.preset_ = name;
  d.eta_ = resolve_eta(1.0 / (kEtaDen * smoothness), extras, &d.theoretical_);
  return d;
}

SarahParams sarah_defaults(int n, double smoothness) {
  if (n < 1) throw InvalidArgument("sarah_defaults: n must be >= 1");
  if (!(smoothness > 0.0))
    throw InvalidArgument("sarah_defaults: smoothness constant must be positive");
  const int r = ceil_sqrt(n);
  return {r, r, 1.0 / (kEtaDen * smoothness)};
}

DSarahParams dsarah_defaults(int n, int m, double smoothness) {
  if (n < 1 || m < 1) throw InvalidArgument("dsarah_defaults: n and m must be >= 1");
  if (!(smoothness > 0.0))
    throw InvalidArgument("dsarah_defaults: smoothness constant must be positive");
  return {ceil_sqrt(static_cast<long long>(n) * m), ceil_sqrt(n), ceil_sqrt(m),
          1.0 / (kEtaDen * smoothness)};
}

}  // namespace vropt
