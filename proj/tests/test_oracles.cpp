#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <memory>
#include <vector>

#include "doctest.h"
#include "vropt/errors.hpp"
#include "vropt/objective.hpp"
#include "vropt/oracles.hpp"
#include "vropt/rng.hpp"
#include "vropt/synthetic.hpp"

using namespace vropt;
using namespace vropt::oracles;

namespace {

Point pt1(double a) {
  Point p(1);
  p[0] = a;
  return p;
}

Point gauss_point(int d, Rng& rng) {
  Point p(d);
  for (int j = 0; j < d; ++j) p[j] = rng.normal();
  return p;
}

std::shared_ptr<const QuadraticComponents> sphere_obj(int n, int d, Rng& rng) {
  std::vector<Point> centers;
  for (int i = 0; i < n; ++i) centers.push_back(gauss_point(d, rng));
  return std::make_shared<QuadraticComponents>(QuadraticComponents::spheres(std::move(centers)));
}

std::shared_ptr<const RobustRegressionLoss> robust_obj(int n, int d, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.size = n;
  spec.dimension = d;
  spec.noise_scale = 1.0;
  spec.seed = seed;
  return std::make_shared<RobustRegressionLoss>(
      std::make_shared<Dataset>(synthesize_dataset(spec)));
}

std::vector<Point> random_table(int n, int d, Rng& rng) {
  std::vector<Point> t;
  for (int i = 0; i < n; ++i) t.push_back(gauss_point(d, rng));
  return t;
}

}  // namespace

TEST_CASE("subset walker visits every combination in lexicographic order") {
  std::vector<std::vector<int>> seen;
  for_each_subset(4, 2, [&](const std::vector<int>& s) { seen.push_back(s); });
  const std::vector<std::vector<int>> want{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
  CHECK(seen == want);

  long long count = 0;
  for_each_subset(7, 3, [&](const std::vector<int>&) { ++count; });
  CHECK(count == 35);

  count = 0;
  for_each_subset(5, 5, [&](const std::vector<int>& s) {
    ++count;
    CHECK(s == std::vector<int>{0, 1, 2, 3, 4});
  });
  CHECK(count == 1);

  CHECK_THROWS_AS(for_each_subset(30, 15, [](const std::vector<int>&) {}), InstanceTooLarge);
  CHECK_THROWS_AS(for_each_subset(3, 4, [](const std::vector<int>&) {}), InvalidArgument);
  CHECK_THROWS_AS(for_each_subset(0, 0, [](const std::vector<int>&) {}), InvalidArgument);
}

TEST_CASE("two-component enumeration matches the hand computation") {
  // f_0(x) = x^2/2, f_1(x) = (x-2)^2/2 on the line, so every quantity in the
  // report can be worked out on paper.
  std::vector<Point> centers{pt1(0.0), pt1(2.0)};
  const QuadraticComponents obj(QuadraticComponents::spheres(std::move(centers)));

  EstimatorSnapshot s;
  s.objective = &obj;
  s.x_curr = pt1(1.0);
  s.x_prev = pt1(0.5);
  s.v_prev = pt1(0.25);
  s.table = {pt1(0.1), pt1(-0.3)};
  s.lambda = 0.5;
  s.batch = 1;

  const EnumerationReport rep = exhaustive_estimator_moments(s, obj.exact_smoothness());
  CHECK(rep.outcomes == 2);
  CHECK(rep.empirical_mean[0] == doctest::Approx(0.375).epsilon(1e-14));
  CHECK(rep.max_deviation <= 1e-14);
  CHECK(rep.second_moment == doctest::Approx(0.300625).epsilon(1e-14));
  CHECK(rep.rhs == doctest::Approx(1.040625).epsilon(1e-14));
  CHECK(rep.slack() > 0.0);
}

TEST_CASE("estimator mean identity holds on random states") {
  Rng rng(90210);
  const int n = 6, d = 3;
  const auto obj = robust_obj(n, d, 4);
  const double lipschitz = estimate_smoothness(obj->data(), 0.0);
  for (int rep_i = 0; rep_i < 5; ++rep_i) {
    EstimatorSnapshot s;
    s.objective = obj.get();
    s.x_curr = gauss_point(d, rng);
    s.x_prev = gauss_point(d, rng);
    s.v_prev = gauss_point(d, rng);
    s.table = random_table(n, d, rng);
    s.lambda = 0.3;
    s.batch = 2;
    const EnumerationReport rep = exhaustive_estimator_moments(s, lipschitz);
    CHECK(rep.outcomes == 15);
    CHECK(rep.max_deviation <= 1e-10);
    CHECK(rep.slack() >= -1e-12);
  }
}

TEST_CASE("variance collapses when the state is fully synchronized") {
  Rng rng(5150);
  const int n = 5, d = 3;
  const auto obj = sphere_obj(n, d, rng);
  EstimatorSnapshot s;
  s.objective = obj.get();
  s.x_prev = gauss_point(d, rng);
  s.x_curr = s.x_prev;
  s.v_prev = obj->full_gradient(s.x_prev);
  for (int j = 0; j < n; ++j) s.table.push_back(obj->component_gradient(j, s.x_prev));
  s.lambda = 0.5;
  s.batch = 2;
  const EnumerationReport rep = exhaustive_estimator_moments(s, obj->exact_smoothness());
  CHECK(rep.second_moment <= 1e-28);
  CHECK(rep.rhs <= 1e-28);
  CHECK(rep.max_deviation <= 1e-14);
}

TEST_CASE("snapshot validation") {
  Rng rng(31337);
  const auto obj = sphere_obj(4, 2, rng);
  EstimatorSnapshot s;
  s.objective = obj.get();
  s.x_curr = gauss_point(2, rng);
  s.x_prev = gauss_point(2, rng);
  s.v_prev = gauss_point(2, rng);
  s.table = random_table(4, 2, rng);
  s.lambda = 0.5;
  s.batch = 2;

  auto bad = s;
  bad.objective = nullptr;
  CHECK_THROWS_AS(exhaustive_estimator_moments(bad, 1.0), InvalidArgument);
  bad = s;
  bad.table.pop_back();
  CHECK_THROWS_AS(exhaustive_estimator_moments(bad, 1.0), InvalidArgument);
  bad = s;
  bad.batch = 5;
  CHECK_THROWS_AS(exhaustive_estimator_moments(bad, 1.0), InvalidArgument);
  bad = s;
  bad.lambda = 0.0;
  CHECK_THROWS_AS(exhaustive_estimator_moments(bad, 1.0), InvalidArgument);
  bad = s;
  bad.lambda = 1.5;
  CHECK_THROWS_AS(exhaustive_estimator_moments(bad, 1.0), InvalidArgument);
  CHECK_THROWS_AS(exhaustive_estimator_moments(s, 0.0), InvalidArgument);
}

TEST_CASE("table freshness identity is exact for every batch size") {
  Rng rng(8086);
  const int n = 6, d = 4;
  const auto obj = robust_obj(n, d, 12);
  const Point x_next = gauss_point(d, rng);
  for (int b : {1, 2, 3, 5, 6}) {
    TableDriftSnapshot s;
    s.objective = obj.get();
    s.table = random_table(n, d, rng);
    s.batch = b;
    const EnumerationReport rep = exhaustive_table_drift(s, x_next);
    CHECK(rep.max_deviation <= 1e-12);
    if (b == n) CHECK(rep.second_moment == 0.0);  // every slot refreshed
  }
}

TEST_CASE("federated enumeration covers the whole outcome product") {
  Rng rng(2718);
  const int n = 3, m = 4, d = 2;
  std::vector<std::shared_ptr<const QuadraticComponents>> owners;
  DistEstimatorSnapshot s;
  for (int i = 0; i < n; ++i) {
    owners.push_back(sphere_obj(m, d, rng));
    s.clients.push_back(owners.back().get());
    s.tables.push_back(random_table(m, d, rng));
  }
  s.x_curr = gauss_point(d, rng);
  s.x_prev = gauss_point(d, rng);
  s.v_prev = gauss_point(d, rng);
  s.lambda = 0.25;
  s.client_sample = 2;
  s.batch = 2;

  const EnumerationReport rep = exhaustive_dist_estimator_mean(s);
  CHECK(rep.outcomes == 3LL * 6 * 6);  // C(3,2) * C(4,2)^2
  CHECK(rep.max_deviation <= 1e-10);

  auto bad = s;
  bad.tables.pop_back();
  CHECK_THROWS_AS(exhaustive_dist_estimator_mean(bad), InvalidArgument);
  bad = s;
  bad.client_sample = 4;
  CHECK_THROWS_AS(exhaustive_dist_estimator_mean(bad), InvalidArgument);
  bad = s;
  bad.lambda = 0.0;
  CHECK_THROWS_AS(exhaustive_dist_estimator_mean(bad), InvalidArgument);
}

TEST_CASE("federated enumeration refuses oversized instances") {
  Rng rng(13);
  const int n = 8, m = 12, d = 2;
  DistEstimatorSnapshot s;
  std::vector<std::shared_ptr<const QuadraticComponents>> owners;
  for (int i = 0; i < n; ++i) {
    owners.push_back(sphere_obj(m, d, rng));
    s.clients.push_back(owners.back().get());
    s.tables.push_back(random_table(m, d, rng));
  }
  s.x_curr = gauss_point(d, rng);
  s.x_prev = gauss_point(d, rng);
  s.v_prev = gauss_point(d, rng);
  s.lambda = 0.5;
  s.client_sample = 4;
  s.batch = 6;  // C(8,4) * C(12,6)^4 blows the budget
  CHECK_THROWS_AS(exhaustive_dist_estimator_mean(s), InstanceTooLarge);
}

TEST_CASE("central differences reproduce the analytic gradients") {
  Rng rng(6502);
  const int n = 8, d = 4;
  const auto robust = robust_obj(n, d, 3);

  SyntheticSpec spec;
  spec.size = n;
  spec.dimension = d;
  spec.task = SyntheticSpec::Task::kClassification;
  spec.seed = 5;
  const auto sigmoid = std::make_shared<SigmoidSquaredLoss>(
      std::make_shared<Dataset>(synthesize_dataset(spec)), 0.01);
  const auto quad = sphere_obj(n, d, rng);

  const std::vector<const Objective*> objs{robust.get(), sigmoid.get(), quad.get()};
  for (const Objective* obj : objs) {
    for (int probe = 0; probe < 5; ++probe) {
      const Point x = gauss_point(d, rng);
      const Point fd = finite_difference_gradient(
          [&](const Point& p) { return obj->value(p); }, x, 1e-6);
      const Point exact = obj->full_gradient(x);
      CHECK((fd - exact).norm() <= 1e-5 * (1.0 + exact.norm()));

      const Point cfd = finite_difference_component_gradient(*obj, probe % n, x, 1e-6);
      const Point cexact = obj->component_gradient(probe % n, x);
      CHECK((cfd - cexact).norm() <= 1e-5 * (1.0 + cexact.norm()));
    }
  }
  CHECK_THROWS_AS(finite_difference_gradient([](const Point&) { return 0.0; }, pt1(0.0), 0.0),
                  InvalidArgument);
}

TEST_CASE("descent relation holds with the exact curvature constant") {
  Rng rng(1234);
  const int n = 6, d = 3;
  const auto obj = sphere_obj(n, d, rng);
  const double lipschitz = obj->exact_smoothness();
  for (int rep = 0; rep < 10; ++rep) {
    const Point x = gauss_point(d, rng);
    const Point v = obj->full_gradient(x) + 0.3 * gauss_point(d, rng);
    const double eta = 0.9 / lipschitz;
    const Point x_next = x - eta * v;
    CHECK(descent_relation_gap(*obj, lipschitz, x, x_next, v, eta) >= -1e-9);
  }
  const Point x = gauss_point(d, rng);
  CHECK_THROWS_AS(descent_relation_gap(*obj, lipschitz, x, x, x, 0.0), InvalidArgument);
}
