#include "vropt/optimizers.hpp"

#include <cmath>

#include "vropt/errors.hpp"

namespace vropt {

namespace {
void check_finite(const Point& x, long k) {
  if (!x.allFinite()) throw DivergenceError(k);
}

int dim_or_throw(const std::shared_ptr<const Objective>& obj, const char* who) {
  if (!obj) throw InvalidArgument(std::string(who) + ": null objective");
  return obj->dimension();
}
}  // namespace

ZeroSarah::ZeroSarah(std::shared_ptr<const Objective> obj, ParamSchedule sched, Point x0,
                     std::uint64_t seed)
    : obj_(std::move(obj)),
      sched_(sched),
      x_(std::move(x0)),
      table_(sched.n(), dim_or_throw(obj_, "ZeroSarah")),
      seed_(seed) {
  if (sched_.n() != obj_->num_components())
    throw InvalidArgument("ZeroSarah: schedule n does not match objective");
  if (x_.size() != obj_->dimension()) throw InvalidArgument("ZeroSarah: x0 dimension mismatch");
  x_prev_ = x_;
  v_prev_ = Point::Zero(obj_->dimension());
}

StepReport ZeroSarah::step() {
  const int n = sched_.n();
  const int b = sched_.batch(k_);
  const double lam = sched_.lambda(k_);
  const double eta = sched_.eta(k_);

  Rng rng = substream(seed_, 0, static_cast<std::uint64_t>(k_));
  const std::vector<int> batch = sample_without_replacement(n, b, rng);

  StepReport rep;
  rep.k = k_;
  rep.batch = b;
  rep.eta = eta;
  rep.lambda = lam;
  rep.full_batch = (b == n);
  rep.paper_increment = b;

  Point v;
  if (lam == 1.0 && b == n) {
    // All three estimator terms collapse to the full mean gradient; compute
    // it in index order so the trajectory matches exact gradient descent.
    Point sum = Point::Zero(obj_->dimension());
    for (int i : batch) {
      Point g = obj_->component_gradient(i, x_);
      sum += g;
      table_.replace(i, std::move(g));
    }
    sum /= n;
    v = std::move(sum);
    rep.actual_increment = n;
  } else {
    const Point y_mean = table_.mean();  // mean of y^{k-1}, read before updates
    Point diff_sum = Point::Zero(obj_->dimension());
    Point corr_sum = Point::Zero(obj_->dimension());
    for (int i : batch) {
      Point g_curr = obj_->component_gradient(i, x_);
      const Point g_prev = (k_ == 0) ? g_curr : obj_->component_gradient(i, x_prev_);
      diff_sum += g_curr - g_prev;
      corr_sum += g_prev - table_.entry(i);
      table_.replace(i, std::move(g_curr));
    }
    v = diff_sum / b + (1.0 - lam) * v_prev_ + lam * (corr_sum / b + y_mean);
    rep.actual_increment = (k_ == 0) ? b : 2LL * b;
  }
  if (b == n) table_.resync();

  check_finite(v, k_);
  rep.direction = v;

  x_prev_ = x_;
  x_ -= eta * v;
  check_finite(x_, k_);
  v_prev_ = std::move(v);

  counters_.paper_count += rep.paper_increment;
  counters_.actual_count += rep.actual_increment;
  counters_.full_batch_events += rep.full_batch ? 1 : 0;
  ++k_;
  return rep;
}

Sarah::Sarah(std::shared_ptr<const Objective> obj, SarahParams params, Point x0,
             std::uint64_t seed)
    : obj_(std::move(obj)), params_(params), x_(std::move(x0)), seed_(seed) {
  if (!obj_) throw InvalidArgument("Sarah: null objective");
  if (params_.epoch_length < 0) throw InvalidArgument("Sarah: negative epoch length");
  if (params_.batch < 1 || params_.batch > obj_->num_components())
    throw InvalidArgument("Sarah: batch must lie in [1, n]");
  if (!(params_.eta > 0.0)) throw InvalidArgument("Sarah: stepsize must be positive");
  if (x_.size() != obj_->dimension()) throw InvalidArgument("Sarah: x0 dimension mismatch");
  x_prev_ = x_;
  v_ = Point::Zero(obj_->dimension());
}

StepReport Sarah::step() {
  const int n = obj_->num_components();
  const int b = params_.batch;

  StepReport rep;
  rep.k = k_;
  rep.eta = params_.eta;

  if (pos_ == 0) {
    v_ = obj_->full_gradient(x_);
    rep.batch = n;
    rep.full_batch = true;
    rep.paper_increment = n;
    rep.actual_increment = n;
  } else {
    Rng rng = substream(seed_, 0, static_cast<std::uint64_t>(k_));
    Point diff_sum = Point::Zero(obj_->dimension());
    for (int i : sample_without_replacement(n, b, rng))
      diff_sum += obj_->component_gradient(i, x_) - obj_->component_gradient(i, x_prev_);
    v_ += diff_sum / b;
    rep.batch = b;
    rep.full_batch = (b == n);
    rep.paper_increment = b;
    rep.actual_increment = 2LL * b;
  }

  check_finite(v_, k_);
  rep.direction = v_;

  x_prev_ = x_;
  x_ -= params_.eta * v_;
  check_finite(x_, k_);

  counters_.paper_count += rep.paper_increment;
  counters_.actual_count += rep.actual_increment;
  counters_.full_batch_events += rep.full_batch ? 1 : 0;
  ++k_;
  pos_ = (pos_ + 1) % (params_.epoch_length + 1);
  return rep;
}

std::vector<StepReport> Sarah::run_epoch() {
  std::vector<StepReport> reports;
  reports.reserve(static_cast<std::size_t>(params_.epoch_length) + 1);
  do {
    reports.push_back(step());
  } while (pos_ != 0);
  return reports;
}

Gd::Gd(std::shared_ptr<const Objective> obj, double eta, Point x0)
    : obj_(std::move(obj)), eta_(eta), x_(std::move(x0)) {
  if (!obj_) throw InvalidArgument("Gd: null objective");
  if (!(eta_ > 0.0)) throw InvalidArgument("Gd: stepsize must be positive");
  if (x_.size() != obj_->dimension()) throw InvalidArgument("Gd: x0 dimension mismatch");
}

StepReport Gd::step() {
  const int n = obj_->num_components();
  Point g = obj_->full_gradient(x_);
  check_finite(g, k_);

  StepReport rep;
  rep.k = k_;
  rep.batch = n;
  rep.eta = eta_;
  rep.full_batch = true;
  rep.paper_increment = n;
  rep.actual_increment = n;
  rep.direction = g;

  x_ -= eta_ * g;
  check_finite(x_, k_);

  counters_.paper_count += n;
  counters_.actual_count += n;
  counters_.full_batch_events += 1;
  ++k_;
  return rep;
}

std::size_t select_output_index(std::span<const double> etas, Rng& rng) {
  if (etas.empty()) throw InvalidArgument("select_output: no iterates");
  double total = 0.0;
  for (double e : etas) {
    if (!(e > 0.0)) throw InvalidArgument("select_output: stepsizes must be positive");
    total += e;
  }
  const double u = rng.uniform01() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < etas.size(); ++i) {
    acc += etas[i];
    if (u < acc) return i;
  }
  return etas.size() - 1;
}

Point select_output(std::span<const Point> iterates, std::span<const double> etas, Rng& rng) {
  if (iterates.size() != etas.size())
    throw InvalidArgument("select_output: iterate/stepsize count mismatch");
  return iterates[select_output_index(etas, rng)];
}

}  // namespace vropt
