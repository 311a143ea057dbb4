#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "vropt/gradient_table.hpp"
#include "vropt/objective.hpp"
#include "vropt/rng.hpp"
#include "vropt/schedule.hpp"
#include "vropt/types.hpp"

namespace vropt {

// One client in the simulated federation: its local finite-sum objective
// (m components), its stored-gradient table, and what it has evaluated.
// Clients hold no copy of the server iterate; the simulator hands it to them.
struct ClientState {
  std::shared_ptr<const Objective> objective;
  GradientTable table;
  GradCounter counters;
};

struct RoundEvent {
  long round = 0;
  std::vector<int> sampled_clients;  // ascending ids
  bool full_participation = false;   // every client, full local batch
  long long paper_increment = 0;
  long long actual_increment = 0;
  Point direction;
};

// Uniform random s-subset of the n client ids, sorted ascending.
std::vector<int> sample_clients(int n, int s, Rng& rng);

// Federated variant of the single-loop estimator. Each round samples s_k
// clients; a sampled client i draws a local minibatch I, reports the batch
// means of g_{ij}(x^k), g_{ij}(x^{k-1}) and of its stored y_{ij}, then
// refreshes those table slots. The server forms
//   v^k = (1/s) sum_S (G_i - P_i) + (1-lambda) v^{k-1}
//       + lambda [ (1/s) sum_S (P_i - Y_i) + ybar^{k-1} ]
// with ybar the pre-round global mean of the client table means, updated
// afterwards from the deltas the sampled clients report. Unsampled clients
// are never touched.
class DZeroSarah {
 public:
  DZeroSarah(std::vector<std::shared_ptr<const Objective>> clients, DistSchedule sched, Point x0,
             std::uint64_t seed);

  RoundEvent round();

  const Point& iterate() const { return x_; }
  long round_index() const { return k_; }
  const GradCounter& counters() const { return counters_; }
  const ClientState& client(int i) const { return clients_[static_cast<std::size_t>(i)]; }
  int num_clients() const { return static_cast<int>(clients_.size()); }
  int samples_per_client() const { return m_; }
  const Point& table_mean() const { return y_mean_; }
  const DistSchedule& schedule() const { return sched_; }

  // (1/n) sum_i grad f_i(x): measurement only, touches no counters.
  Point full_gradient(const Point& x) const;
  double value(const Point& x) const;

 private:
  std::vector<ClientState> clients_;
  DistSchedule sched_;
  int m_ = 0;
  Point x_, x_prev_, v_prev_, y_mean_;
  long k_ = 0;
  std::uint64_t seed_;
  GradCounter counters_;
};

// Federated epoch baseline: every epoch_length-th round all n clients send
// their exact local gradients; in between, s sampled clients send minibatch
// correction terms added onto the running v.
class DSarah {
 public:
  DSarah(std::vector<std::shared_ptr<const Objective>> clients, DSarahParams params, Point x0,
         std::uint64_t seed);

  RoundEvent round();

  const Point& iterate() const { return x_; }
  long round_index() const { return k_; }
  const GradCounter& counters() const { return counters_; }
  const ClientState& client(int i) const { return clients_[static_cast<std::size_t>(i)]; }
  int num_clients() const { return static_cast<int>(clients_.size()); }
  int samples_per_client() const { return m_; }
  const DSarahParams& params() const { return params_; }

  Point full_gradient(const Point& x) const;
  double value(const Point& x) const;

 private:
  std::vector<ClientState> clients_;
  DSarahParams params_;
  int m_ = 0;
  Point x_, x_prev_, v_;
  long k_ = 0;
  std::uint64_t seed_;
  GradCounter counters_;
};

}  // namespace vropt
