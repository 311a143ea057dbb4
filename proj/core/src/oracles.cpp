#include "vropt/oracles.hpp"

#include <cmath>

#include "vropt/errors.hpp"

namespace vropt::oracles {

namespace {

double binomial(int n, int b) {
  double c = 1.0;
  for (int i = 1; i <= b; ++i) c = c * (n - b + i) / i;
  return c;
}

Point table_mean(const std::vector<Point>& table) {
  Point m = Point::Zero(table[0].size());
  for (const Point& y : table) m += y;
  return m / static_cast<double>(table.size());
}

void validate_snapshot(const EstimatorSnapshot& s) {
  if (!s.objective) throw InvalidArgument("oracle: null objective");
  const int n = s.objective->num_components();
  if (static_cast<int>(s.table.size()) != n)
    throw InvalidArgument("oracle: table size must equal component count");
  if (s.batch < 1 || s.batch > n) throw InvalidArgument("oracle: batch must lie in [1, n]");
  if (!(s.lambda > 0.0) || s.lambda > 1.0)
    throw InvalidArgument("oracle: lambda must lie in (0, 1]");
}

// Line-by-line recomputation of the update direction for one concrete batch.
Point direction_for_batch(const EstimatorSnapshot& s, const std::vector<int>& batch,
                          const Point& y_bar) {
  const double b = static_cast<double>(batch.size());
  Point t1 = Point::Zero(s.x_curr.size());
  Point t3 = Point::Zero(s.x_curr.size());
  for (int i : batch) {
    t1 += s.objective->component_gradient(i, s.x_curr) -
          s.objective->component_gradient(i, s.x_prev);
    t3 += s.objective->component_gradient(i, s.x_prev) - s.table[static_cast<std::size_t>(i)];
  }
  return t1 / b + (1.0 - s.lambda) * s.v_prev + s.lambda * (t3 / b + y_bar);
}

}  // namespace

void for_each_subset(int n, int b, const std::function<void(const std::vector<int>&)>& fn,
                     long long max_outcomes) {
  if (n < 1 || b < 1 || b > n) throw InvalidArgument("for_each_subset: need 1 <= b <= n");
  if (binomial(n, b) > static_cast<double>(max_outcomes))
    throw InstanceTooLarge("for_each_subset: C(" + std::to_string(n) + ", " + std::to_string(b) +
                           ") exceeds the outcome budget");
  std::vector<int> idx(static_cast<std::size_t>(b));
  for (int i = 0; i < b; ++i) idx[static_cast<std::size_t>(i)] = i;
  for (;;) {
    fn(idx);
    int p = b - 1;
    while (p >= 0 && idx[static_cast<std::size_t>(p)] == n - b + p) --p;
    if (p < 0) break;
    ++idx[static_cast<std::size_t>(p)];
    for (int q = p + 1; q < b; ++q)
      idx[static_cast<std::size_t>(q)] = idx[static_cast<std::size_t>(q - 1)] + 1;
  }
}

EnumerationReport exhaustive_estimator_moments(const EstimatorSnapshot& s, double smoothness) {
  validate_snapshot(s);
  if (!(smoothness > 0.0)) throw InvalidArgument("oracle: smoothness constant must be positive");
  const int n = s.objective->num_components();
  const Point y_bar = table_mean(s.table);
  const Point grad_curr = s.objective->full_gradient(s.x_curr);
  const Point grad_prev = s.objective->full_gradient(s.x_prev);

  EnumerationReport rep;
  rep.empirical_mean = Point::Zero(s.x_curr.size());
  Point mean_acc = Point::Zero(s.x_curr.size());
  double m2_acc = 0.0;
  long long count = 0;
  for_each_subset(n, s.batch, [&](const std::vector<int>& batch) {
    const Point v = direction_for_batch(s, batch, y_bar);
    mean_acc += v;
    m2_acc += (v - grad_curr).squaredNorm();
    ++count;
  });
  rep.outcomes = count;
  rep.empirical_mean = mean_acc / static_cast<double>(count);
  rep.second_moment = m2_acc / static_cast<double>(count);

  const Point predicted = grad_curr + (1.0 - s.lambda) * (s.v_prev - grad_prev);
  rep.max_deviation = (rep.empirical_mean - predicted).norm();

  double table_gap = 0.0;
  for (int j = 0; j < n; ++j)
    table_gap += (s.objective->component_gradient(j, s.x_prev) -
                  s.table[static_cast<std::size_t>(j)])
                     .squaredNorm();
  table_gap /= n;
  const double b = s.batch;
  rep.rhs = (1.0 - s.lambda) * (1.0 - s.lambda) * (s.v_prev - grad_prev).squaredNorm() +
            2.0 * smoothness * smoothness / b * (s.x_curr - s.x_prev).squaredNorm() +
            2.0 * s.lambda * s.lambda / b * table_gap;
  return rep;
}

EnumerationReport exhaustive_table_drift(const TableDriftSnapshot& s, const Point& x_next) {
  if (!s.objective) throw InvalidArgument("oracle: null objective");
  const int n = s.objective->num_components();
  if (static_cast<int>(s.table.size()) != n)
    throw InvalidArgument("oracle: table size must equal component count");
  if (s.batch < 1 || s.batch > n) throw InvalidArgument("oracle: batch must lie in [1, n]");

  // Per-index gaps against the pre-update table; refreshed entries are exact.
  std::vector<double> gap(static_cast<std::size_t>(n));
  double total_gap = 0.0;
  for (int j = 0; j < n; ++j) {
    gap[static_cast<std::size_t>(j)] = (s.objective->component_gradient(j, x_next) -
                                        s.table[static_cast<std::size_t>(j)])
                                           .squaredNorm();
    total_gap += gap[static_cast<std::size_t>(j)];
  }

  // Summing the unrefreshed indices directly keeps every term nonnegative,
  // so the full-batch case comes out exactly zero instead of leaving
  // cancellation residue behind.
  std::vector<char> refreshed(static_cast<std::size_t>(n), 0);
  double lhs_acc = 0.0;
  long long count = 0;
  for_each_subset(n, s.batch, [&](const std::vector<int>& batch) {
    for (int i : batch) refreshed[static_cast<std::size_t>(i)] = 1;
    double kept = 0.0;
    for (int j = 0; j < n; ++j) {
      if (!refreshed[static_cast<std::size_t>(j)]) kept += gap[static_cast<std::size_t>(j)];
    }
    for (int i : batch) refreshed[static_cast<std::size_t>(i)] = 0;
    lhs_acc += kept / n;
    ++count;
  });

  EnumerationReport rep;
  rep.outcomes = count;
  rep.empirical_mean = Point::Zero(x_next.size());
  rep.second_moment = lhs_acc / static_cast<double>(count);
  rep.rhs = (1.0 - static_cast<double>(s.batch) / n) * (total_gap / n);
  rep.max_deviation = std::abs(rep.second_moment - rep.rhs) / std::max(1.0, std::abs(rep.rhs));
  return rep;
}

EnumerationReport exhaustive_dist_estimator_mean(const DistEstimatorSnapshot& s) {
  const int n = static_cast<int>(s.clients.size());
  if (n < 1) throw InvalidArgument("oracle: no clients");
  for (const Objective* c : s.clients)
    if (!c) throw InvalidArgument("oracle: null client objective");
  const int m = s.clients[0]->num_components();
  const auto d = s.x_curr.size();
  if (static_cast<int>(s.tables.size()) != n)
    throw InvalidArgument("oracle: need one table per client");
  for (int i = 0; i < n; ++i) {
    if (s.clients[static_cast<std::size_t>(i)]->num_components() != m)
      throw InvalidArgument("oracle: clients must share the sample count");
    if (static_cast<int>(s.tables[static_cast<std::size_t>(i)].size()) != m)
      throw InvalidArgument("oracle: table size must equal client sample count");
  }
  if (s.client_sample < 1 || s.client_sample > n)
    throw InvalidArgument("oracle: client sample size must lie in [1, n]");
  if (s.batch < 1 || s.batch > m) throw InvalidArgument("oracle: batch must lie in [1, m]");
  if (!(s.lambda > 0.0) || s.lambda > 1.0)
    throw InvalidArgument("oracle: lambda must lie in (0, 1]");

  const double outcomes_est =
      binomial(n, s.client_sample) * std::pow(binomial(m, s.batch), s.client_sample);
  if (!(outcomes_est <= 1000000.0))
    throw InstanceTooLarge("distributed enumeration outcome count exceeds the budget");

  // Global table mean over all clients and samples.
  Point y_bar = Point::Zero(d);
  for (const auto& t : s.tables)
    for (const Point& y : t) y_bar += y;
  y_bar /= static_cast<double>(n) * m;

  // Cache raw per-sample gradients so the leaf work is pure arithmetic.
  std::vector<std::vector<Point>> gc(static_cast<std::size_t>(n)),
      gp(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) {
      gc[static_cast<std::size_t>(i)].push_back(
          s.clients[static_cast<std::size_t>(i)]->component_gradient(j, s.x_curr));
      gp[static_cast<std::size_t>(i)].push_back(
          s.clients[static_cast<std::size_t>(i)]->component_gradient(j, s.x_prev));
    }

  // Walk the full outcome space: every client subset crossed with every
  // choice of one minibatch per sampled client.
  Point mean_acc = Point::Zero(d);
  long long count = 0;
  const double ss = static_cast<double>(s.client_sample);
  for_each_subset(n, s.client_sample, [&](const std::vector<int>& subset) {
    std::vector<std::vector<int>> picks(subset.size());
    std::function<void(std::size_t)> descend = [&](std::size_t pos) {
      if (pos == subset.size()) {
        Point t1 = Point::Zero(d), t3 = Point::Zero(d);
        for (std::size_t q = 0; q < subset.size(); ++q) {
          const auto ci = static_cast<std::size_t>(subset[q]);
          Point a = Point::Zero(d), b2 = Point::Zero(d), c = Point::Zero(d);
          for (int j : picks[q]) {
            a += gc[ci][static_cast<std::size_t>(j)];
            b2 += gp[ci][static_cast<std::size_t>(j)];
            c += s.tables[ci][static_cast<std::size_t>(j)];
          }
          t1 += a / s.batch - b2 / s.batch;
          t3 += b2 / s.batch - c / s.batch;
        }
        mean_acc += t1 / ss + (1.0 - s.lambda) * s.v_prev + s.lambda * (t3 / ss + y_bar);
        ++count;
        return;
      }
      for_each_subset(m, s.batch, [&](const std::vector<int>& batch) {
        picks[pos] = batch;
        descend(pos + 1);
      });
    };
    descend(0);
  });

  EnumerationReport rep;
  rep.outcomes = count;
  rep.empirical_mean = mean_acc / static_cast<double>(count);

  Point grad_curr = Point::Zero(d), grad_prev = Point::Zero(d);
  for (int i = 0; i < n; ++i) {
    grad_curr += s.clients[static_cast<std::size_t>(i)]->full_gradient(s.x_curr);
    grad_prev += s.clients[static_cast<std::size_t>(i)]->full_gradient(s.x_prev);
  }
  grad_curr /= n;
  grad_prev /= n;
  const Point predicted = grad_curr + (1.0 - s.lambda) * (s.v_prev - grad_prev);
  rep.max_deviation = (rep.empirical_mean - predicted).norm();
  rep.second_moment = 0.0;
  rep.rhs = 0.0;
  return rep;
}

Point finite_difference_gradient(const std::function<double(const Point&)>& f, const Point& x,
                                 double h) {
  if (!(h > 0.0)) throw InvalidArgument("finite differences: h must be positive");
  Point g(x.size());
  Point probe = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    probe[j] = x[j] + h;
    const double up = f(probe);
    probe[j] = x[j] - h;
    const double down = f(probe);
    probe[j] = x[j];
    g[j] = (up - down) / (2.0 * h);
  }
  return g;
}

Point finite_difference_component_gradient(const Objective& obj, int i, const Point& x,
                                           double h) {
  return finite_difference_gradient(
      [&](const Point& p) { return obj.component_loss(i, p); }, x, h);
}

double descent_relation_gap(const Objective& obj, double smoothness, const Point& x,
                            const Point& x_next, const Point& v, double eta) {
  if (!(eta > 0.0)) throw InvalidArgument("descent relation: eta must be positive");
  const Point grad = obj.full_gradient(x);
  const double rhs = obj.value(x) - 0.5 * eta * grad.squaredNorm() -
                     (0.5 / eta - 0.5 * smoothness) * (x_next - x).squaredNorm() +
                     0.5 * eta * (v - grad).squaredNorm();
  return rhs - obj.value(x_next);
}

}  // namespace vropt::oracles
