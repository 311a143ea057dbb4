#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "vropt/gradient_table.hpp"
#include "vropt/objective.hpp"
#include "vropt/rng.hpp"
#include "vropt/schedule.hpp"
#include "vropt/types.hpp"

namespace vropt {

// What one parameter update did. direction is the estimator value v^k the
// update x^{k+1} = x^k - eta v^k actually used.
struct StepReport {
  long k = 0;
  int batch = 0;
  double eta = 0.0;
  double lambda = 0.0;
  bool full_batch = false;
  long long paper_increment = 0;
  long long actual_increment = 0;
  Point direction;
};

// Single-loop variance-reduced descent without per-epoch full gradients.
// Estimator, with y the gradient table and I the sampled minibatch:
//   v^k = (1/b) sum_I (g_i(x^k) - g_i(x^{k-1}))
//       + (1-lambda) v^{k-1}
//       + lambda [ (1/b) sum_I (g_i(x^{k-1}) - y_i) + mean(y) ]
// followed by y_i <- g_i(x^k) for i in I. At k = 0 the previous iterate is
// x^0 itself and lambda is 1, so v^0 is the plain minibatch mean.
class ZeroSarah {
 public:
  ZeroSarah(std::shared_ptr<const Objective> obj, ParamSchedule sched, Point x0,
            std::uint64_t seed);

  StepReport step();

  const Point& iterate() const { return x_; }
  long iteration() const { return k_; }
  const GradCounter& counters() const { return counters_; }
  const GradientTable& table() const { return table_; }
  const ParamSchedule& schedule() const { return sched_; }

 private:
  std::shared_ptr<const Objective> obj_;
  ParamSchedule sched_;
  Point x_, x_prev_, v_prev_;
  GradientTable table_;
  long k_ = 0;
  std::uint64_t seed_;
  GradCounter counters_;
};

// Epoch baseline: position 0 of each epoch evaluates the full gradient, the
// next epoch_length steps apply minibatch corrections
//   v^k = (1/b) sum_I (g_i(x^k) - g_i(x^{k-1})) + v^{k-1}.
class Sarah {
 public:
  Sarah(std::shared_ptr<const Objective> obj, SarahParams params, Point x0, std::uint64_t seed);

  StepReport step();
  // One full epoch: epoch_length + 1 updates starting at the full-gradient
  // step. Meaningful only when called at an epoch boundary.
  std::vector<StepReport> run_epoch();

  const Point& iterate() const { return x_; }
  long iteration() const { return k_; }
  int epoch_position() const { return pos_; }
  const GradCounter& counters() const { return counters_; }
  const SarahParams& params() const { return params_; }

 private:
  std::shared_ptr<const Objective> obj_;
  SarahParams params_;
  Point x_, x_prev_, v_;
  long k_ = 0;
  int pos_ = 0;
  std::uint64_t seed_;
  GradCounter counters_;
};

// Exact gradient descent.
class Gd {
 public:
  Gd(std::shared_ptr<const Objective> obj, double eta, Point x0);

  StepReport step();

  const Point& iterate() const { return x_; }
  long iteration() const { return k_; }
  const GradCounter& counters() const { return counters_; }

 private:
  std::shared_ptr<const Objective> obj_;
  double eta_;
  Point x_;
  long k_ = 0;
  GradCounter counters_;
};

// Output rule: pick x^k from the first K iterates with probability
// eta_k / sum_t eta_t.
std::size_t select_output_index(std::span<const double> etas, Rng& rng);
Point select_output(std::span<const Point> iterates, std::span<const double> etas, Rng& rng);

}  // namespace vropt
