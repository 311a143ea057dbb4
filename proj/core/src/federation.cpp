#include "vropt/federation.hpp"

#include "vropt/errors.hpp"

namespace vropt {

namespace {

void check_finite(const Point& x, long k) {
  if (!x.allFinite()) throw DivergenceError(k);
}

// Equal-shaped client objectives are a hard precondition for both simulators.
std::vector<ClientState> make_clients(std::vector<std::shared_ptr<const Objective>> objs,
                                      const char* who, int* m_out, int* d_out) {
  if (objs.empty()) throw InvalidArgument(std::string(who) + ": no clients");
  std::vector<ClientState> clients;
  clients.reserve(objs.size());
  int m = 0, d = 0;
  for (auto& o : objs) {
    if (!o) throw InvalidArgument(std::string(who) + ": null client objective");
    if (clients.empty()) {
      m = o->num_components();
      d = o->dimension();
    } else if (o->num_components() != m || o->dimension() != d) {
      throw InvalidArgument(std::string(who) + ": clients must share sample count and dimension");
    }
    clients.push_back(ClientState{std::move(o), GradientTable(m, d), GradCounter{}});
  }
  *m_out = m;
  *d_out = d;
  return clients;
}

}  // namespace

std::vector<int> sample_clients(int n, int s, Rng& rng) {
  return sample_without_replacement(n, s, rng);
}

DZeroSarah::DZeroSarah(std::vector<std::shared_ptr<const Objective>> clients, DistSchedule sched,
                       Point x0, std::uint64_t seed)
    : sched_(sched), x_(std::move(x0)), seed_(seed) {
  int d = 0;
  clients_ = make_clients(std::move(clients), "DZeroSarah", &m_, &d);
  if (sched_.n() != static_cast<int>(clients_.size()) || sched_.m() != m_)
    throw InvalidArgument("DZeroSarah: schedule (n, m) does not match clients");
  if (x_.size() != d) throw InvalidArgument("DZeroSarah: x0 dimension mismatch");
  x_prev_ = x_;
  v_prev_ = Point::Zero(d);
  y_mean_ = Point::Zero(d);
}

RoundEvent DZeroSarah::round() {
  const int n = static_cast<int>(clients_.size());
  const int s = sched_.clients(k_);
  const int b = sched_.batch(k_);
  const double lam = sched_.lambda(k_);
  const double eta = sched_.eta(k_);
  const auto d = x_.size();

  Rng crng = substream(seed_, kClientSubsetLane, static_cast<std::uint64_t>(k_));
  std::vector<int> sampled = sample_clients(n, s, crng);

  RoundEvent ev;
  ev.round = k_;
  ev.sampled_clients = sampled;
  ev.full_participation = (s == n && b == m_);
  ev.paper_increment = static_cast<long long>(s) * b;
  ev.actual_increment = static_cast<long long>(s) * (k_ == 0 ? b : 2LL * b);

  Point diff_sum = Point::Zero(d);
  Point corr_sum = Point::Zero(d);
  Point mean_delta_sum = Point::Zero(d);

  for (int ci : sampled) {
    ClientState& cl = clients_[static_cast<std::size_t>(ci)];
    Rng mrng = substream(seed_, static_cast<std::uint64_t>(ci), static_cast<std::uint64_t>(k_));
    const Point mean_before = cl.table.mean();

    Point g_curr = Point::Zero(d);
    Point g_prev = Point::Zero(d);
    Point y_prev = Point::Zero(d);
    for (int j : sample_without_replacement(m_, b, mrng)) {
      Point gc = cl.objective->component_gradient(j, x_);
      g_curr += gc;
      if (k_ == 0)
        g_prev += gc;
      else
        g_prev += cl.objective->component_gradient(j, x_prev_);
      y_prev += cl.table.entry(j);
      cl.table.replace(j, std::move(gc));
    }
    if (b == m_) cl.table.resync();
    g_curr /= b;
    g_prev /= b;
    y_prev /= b;

    diff_sum += g_curr - g_prev;
    corr_sum += g_prev - y_prev;
    mean_delta_sum += cl.table.mean() - mean_before;

    cl.counters.paper_count += b;
    cl.counters.actual_count += (k_ == 0) ? b : 2LL * b;
  }

  // y_mean_ still holds the pre-round global mean here.
  Point v = diff_sum / s + (1.0 - lam) * v_prev_ + lam * (corr_sum / s + y_mean_);
  check_finite(v, k_);
  ev.direction = v;

  x_prev_ = x_;
  x_ -= eta * v;
  check_finite(x_, k_);
  v_prev_ = std::move(v);
  y_mean_ += mean_delta_sum / n;

  counters_.paper_count += ev.paper_increment;
  counters_.actual_count += ev.actual_increment;
  counters_.full_batch_events += ev.full_participation ? 1 : 0;
  ++k_;
  return ev;
}

Point DZeroSarah::full_gradient(const Point& x) const {
  Point g = Point::Zero(x_.size());
  for (const auto& cl : clients_) g += cl.objective->full_gradient(x);
  return g / static_cast<double>(clients_.size());
}

double DZeroSarah::value(const Point& x) const {
  double s = 0.0;
  for (const auto& cl : clients_) s += cl.objective->value(x);
  return s / static_cast<double>(clients_.size());
}

DSarah::DSarah(std::vector<std::shared_ptr<const Objective>> clients, DSarahParams params,
               Point x0, std::uint64_t seed)
    : params_(params), x_(std::move(x0)), seed_(seed) {
  int d = 0;
  clients_ = make_clients(std::move(clients), "DSarah", &m_, &d);
  const int n = static_cast<int>(clients_.size());
  if (params_.epoch_length < 1) throw InvalidArgument("DSarah: epoch length must be >= 1");
  if (params_.clients < 1 || params_.clients > n)
    throw InvalidArgument("DSarah: clients per round must lie in [1, n]");
  if (params_.batch < 1 || params_.batch > m_)
    throw InvalidArgument("DSarah: batch must lie in [1, m]");
  if (!(params_.eta > 0.0)) throw InvalidArgument("DSarah: stepsize must be positive");
  if (x_.size() != d) throw InvalidArgument("DSarah: x0 dimension mismatch");
  x_prev_ = x_;
  v_ = Point::Zero(d);
}

RoundEvent DSarah::round() {
  const int n = static_cast<int>(clients_.size());
  const auto d = x_.size();

  RoundEvent ev;
  ev.round = k_;

  if (k_ % params_.epoch_length == 0) {
    // Synchronization round: every client sends its exact local gradient.
    Point g = Point::Zero(d);
    for (int ci = 0; ci < n; ++ci) {
      ClientState& cl = clients_[static_cast<std::size_t>(ci)];
      g += cl.objective->full_gradient(x_);
      cl.counters.paper_count += m_;
      cl.counters.actual_count += m_;
      ev.sampled_clients.push_back(ci);
    }
    v_ = g / static_cast<double>(n);
    ev.full_participation = true;
    ev.paper_increment = static_cast<long long>(n) * m_;
    ev.actual_increment = static_cast<long long>(n) * m_;
  } else {
    Rng crng = substream(seed_, kClientSubsetLane, static_cast<std::uint64_t>(k_));
    ev.sampled_clients = sample_clients(n, params_.clients, crng);
    const int b = params_.batch;

    Point diff_sum = Point::Zero(d);
    for (int ci : ev.sampled_clients) {
      ClientState& cl = clients_[static_cast<std::size_t>(ci)];
      Rng mrng = substream(seed_, static_cast<std::uint64_t>(ci), static_cast<std::uint64_t>(k_));
      Point local = Point::Zero(d);
      for (int j : sample_without_replacement(m_, b, mrng))
        local += cl.objective->component_gradient(j, x_) -
                 cl.objective->component_gradient(j, x_prev_);
      diff_sum += local / b;
      cl.counters.paper_count += b;
      cl.counters.actual_count += 2LL * b;
    }
    v_ += diff_sum / params_.clients;
    ev.full_participation = (params_.clients == n && b == m_);
    ev.paper_increment = static_cast<long long>(params_.clients) * b;
    ev.actual_increment = 2LL * params_.clients * b;
  }

  check_finite(v_, k_);
  ev.direction = v_;

  x_prev_ = x_;
  x_ -= params_.eta * v_;
  check_finite(x_, k_);

  counters_.paper_count += ev.paper_increment;
  counters_.actual_count += ev.actual_increment;
  counters_.full_batch_events += ev.full_participation ? 1 : 0;
  ++k_;
  return ev;
}

Point DSarah::full_gradient(const Point& x) const {
  Point g = Point::Zero(x_.size());
  for (const auto& cl : clients_) g += cl.objective->full_gradient(x);
  return g / static_cast<double>(clients_.size());
}

double DSarah::value(const Point& x) const {
  double s = 0.0;
  for (const auto& cl : clients_) s += cl.objective->value(x);
  return s / static_cast<double>(clients_.size());
}

}  // namespace vropt
