#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <map>
#include <memory>
#include <vector>

#include "doctest.h"
#include "vropt/dataset.hpp"
#include "vropt/errors.hpp"
#include "vropt/gradient_table.hpp"
#include "vropt/objective.hpp"
#include "vropt/rng.hpp"
#include "vropt/synthetic.hpp"

using namespace vropt;

namespace {

std::shared_ptr<const Dataset> one_row(std::vector<std::pair<int, double>> entries, double target,
                                       int dim, DatasetKind kind) {
  return std::make_shared<Dataset>(std::vector<SparseRow>{SparseRow{std::move(entries)}},
                                   std::vector<double>{target}, dim, kind);
}

Point gauss_point(int dim, Rng& rng) {
  Point x(dim);
  for (int i = 0; i < dim; ++i) x[i] = rng.normal();
  return x;
}

}  // namespace

TEST_CASE("rng streams are reproducible and independent") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());

  Rng c = substream(7, 0, 3);
  Rng d = substream(7, 0, 3);
  Rng e = substream(7, 0, 4);
  CHECK(c.next() == d.next());
  CHECK(c.next() != e.next());
}

TEST_CASE("uniform helpers stay inside their ranges") {
  Rng rng(1);
  CHECK(rng.uniform_below(1) == 0);
  for (int i = 0; i < 1000; ++i) {
    CHECK(rng.uniform_below(13) < 13);
    const double u = rng.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  CHECK_THROWS_AS(rng.uniform_below(0), InvalidArgument);
}

TEST_CASE("normal draws have roughly standard moments") {
  Rng rng(99);
  const int n = 20000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.05);
  CHECK(std::abs(var - 1.0) < 0.1);
}

TEST_CASE("sampling without replacement is sorted, unique and in range") {
  Rng rng(5);
  for (int rep = 0; rep < 200; ++rep) {
    const auto s = sample_without_replacement(20, 7, rng);
    REQUIRE(s.size() == 7);
    for (std::size_t i = 0; i < s.size(); ++i) {
      CHECK(s[i] >= 0);
      CHECK(s[i] < 20);
      if (i > 0) CHECK(s[i] > s[i - 1]);
    }
  }
  const auto all = sample_without_replacement(6, 6, rng);
  CHECK(all == std::vector<int>{0, 1, 2, 3, 4, 5});
  CHECK_THROWS_AS(sample_without_replacement(4, 5, rng), InvalidArgument);
}

TEST_CASE("pair subsets of four come out uniform") {
  Rng rng(2024);
  std::map<std::pair<int, int>, int> freq;
  const int draws = 60000;
  for (int i = 0; i < draws; ++i) {
    const auto s = sample_without_replacement(4, 2, rng);
    ++freq[{s[0], s[1]}];
  }
  CHECK(freq.size() == 6);
  for (const auto& [pair, count] : freq) {
    CHECK(std::abs(count / double(draws) - 1.0 / 6.0) < 0.01);
  }
}

TEST_CASE("dataset constructor enforces its invariants") {
  CHECK_THROWS_AS(Dataset({}, {}, 3, DatasetKind::kRegressionTargets), InvalidArgument);
  CHECK_THROWS_AS(Dataset({SparseRow{{{1, 1.0}}}}, {1.0, 2.0}, 3,
                          DatasetKind::kRegressionTargets),
                  InvalidArgument);
  // descending indices
  CHECK_THROWS_AS(Dataset({SparseRow{{{2, 1.0}, {1, 1.0}}}}, {1.0}, 3,
                          DatasetKind::kRegressionTargets),
                  InvalidArgument);
  // index beyond dimension
  CHECK_THROWS_AS(Dataset({SparseRow{{{4, 1.0}}}}, {1.0}, 3, DatasetKind::kRegressionTargets),
                  InvalidArgument);
  // binary labels must be -1/+1
  CHECK_THROWS_AS(Dataset({SparseRow{{{1, 1.0}}}}, {0.5}, 3, DatasetKind::kBinaryLabels),
                  InvalidArgument);
  const Dataset ok({SparseRow{{{1, 3.0}, {3, 4.0}}}}, {1.0}, 3, DatasetKind::kBinaryLabels);
  CHECK(ok.max_row_squared_norm() == 25.0);
}

TEST_CASE("contiguous client partition drops the tail") {
  std::vector<SparseRow> rows;
  std::vector<double> targets;
  for (int i = 0; i < 10; ++i) {
    rows.push_back(SparseRow{{{1, double(i)}}});
    targets.push_back(double(i));
  }
  const Dataset ds(rows, targets, 1, DatasetKind::kRegressionTargets);
  const auto parts = partition_clients(ds, 3);
  REQUIRE(parts.size() == 3);
  for (const auto& p : parts) CHECK(p.size() == 3);
  CHECK(parts[1].target(0) == 3.0);
  CHECK(parts[2].target(2) == 8.0);  // row 9 is dropped
  CHECK_THROWS_AS(partition_clients(ds, 0), InvalidArgument);
  CHECK_THROWS_AS(partition_clients(ds, 11), InvalidArgument);
}

TEST_CASE("robust regression loss and gradient at a hand point") {
  const auto ds = one_row({{1, 1.0}}, std::sqrt(2.0), 2, DatasetKind::kRegressionTargets);
  const RobustRegressionLoss obj(ds);
  const Point x = Point::Zero(2);
  CHECK(obj.component_loss(0, x) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  const Point g = obj.component_gradient(0, x);
  CHECK(g[0] == doctest::Approx(-std::sqrt(2.0) / 2.0).epsilon(1e-15));
  CHECK(g[1] == 0.0);
}

TEST_CASE("squared sigmoid loss and gradient at zero margin") {
  const auto ds = one_row({{1, 1.0}}, 1.0, 2, DatasetKind::kBinaryLabels);
  const SigmoidSquaredLoss obj(ds, 0.0);
  const Point x = Point::Zero(2);
  CHECK(obj.component_loss(0, x) == doctest::Approx(0.25).epsilon(1e-15));
  const Point g = obj.component_gradient(0, x);
  CHECK(g[0] == doctest::Approx(-0.25).epsilon(1e-15));
  CHECK(g[1] == 0.0);

  // the clamp keeps huge margins finite
  Point far = Point::Zero(2);
  far[0] = 1e9;
  CHECK(std::isfinite(obj.component_loss(0, far)));
  CHECK(obj.component_gradient(0, far).allFinite());
}

TEST_CASE("sigmoid loss includes the ridge term and rejects regression targets") {
  const auto ds = one_row({{1, 1.0}}, 1.0, 2, DatasetKind::kBinaryLabels);
  const SigmoidSquaredLoss obj(ds, 0.5);
  Point x(2);
  x << 0.0, 2.0;
  CHECK(obj.component_loss(0, x) == doctest::Approx(0.25 + 0.25 * 4.0).epsilon(1e-15));
  const Point g = obj.component_gradient(0, x);
  CHECK(g[1] == doctest::Approx(1.0).epsilon(1e-15));

  const auto reg = one_row({{1, 1.0}}, 2.5, 2, DatasetKind::kRegressionTargets);
  CHECK_THROWS_AS(SigmoidSquaredLoss(reg, 0.1), InvalidArgument);
  CHECK_THROWS_AS(SigmoidSquaredLoss(ds, -0.1), InvalidArgument);
}

TEST_CASE("quadratic components know their curvature and minimizer") {
  std::vector<Point> centers;
  Point c0(2), c1(2);
  c0 << 1.0, 0.0;
  c1 << 3.0, 2.0;
  centers = {c0, c1};
  const QuadraticComponents spheres = QuadraticComponents::spheres(centers);
  CHECK(spheres.exact_smoothness() == doctest::Approx(1.0));
  const Point xbar = spheres.minimizer();
  CHECK(xbar[0] == doctest::Approx(2.0));
  CHECK(xbar[1] == doctest::Approx(1.0));
  // f(centroid) = mean of 0.5 ||centroid - c_i||^2 = 0.5 * 2 = 1
  CHECK(spheres.min_value() == doctest::Approx(1.0));
  Point probe(2);
  probe << 5.0, -1.0;
  CHECK((spheres.component_gradient(1, probe) - (probe - c1)).norm() == 0.0);

  Rng rng(8);
  std::vector<QuadraticComponents::Component> comps;
  for (int i = 0; i < 4; ++i) {
    Matrix b(3, 3);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) b(r, c) = rng.normal();
    comps.push_back({b.transpose() * b + 0.1 * Matrix::Identity(3, 3), gauss_point(3, rng)});
  }
  const QuadraticComponents quad(comps);
  CHECK(quad.full_gradient(quad.minimizer()).norm() < 1e-10);
  CHECK(quad.exact_smoothness() > 0.0);
}

TEST_CASE("quadratic component validation") {
  Matrix skew(2, 2);
  skew << 1.0, 2.0, 0.0, 1.0;
  CHECK_THROWS_AS(QuadraticComponents({{skew, Point::Zero(2)}}), InvalidArgument);
  CHECK_THROWS_AS(QuadraticComponents({{-Matrix::Identity(2, 2), Point::Zero(2)}}),
                  InvalidArgument);
  CHECK_THROWS_AS(QuadraticComponents({{Matrix::Zero(2, 2), Point::Zero(2)}}), InvalidArgument);
}

TEST_CASE("curvature estimate follows the max row norm") {
  const auto ds = one_row({{1, 3.0}, {2, 4.0}}, 1.0, 2, DatasetKind::kBinaryLabels);
  CHECK(estimate_smoothness(*ds, 0.0) == doctest::Approx(0.15405 * 25.0).epsilon(1e-15));
  CHECK(estimate_smoothness(*ds, 0.5) == doctest::Approx(0.15405 * 25.0 + 0.5).epsilon(1e-15));
  CHECK(default_sigmoid_l2(*ds) == doctest::Approx(0.15405e-6 * 25.0).epsilon(1e-15));

  const auto zero = one_row({}, 1.0, 2, DatasetKind::kRegressionTargets);
  CHECK_THROWS_AS(estimate_smoothness(*zero, 0.0), InvalidArgument);
  CHECK(estimate_smoothness(*zero, 0.3) == doctest::Approx(0.3));
}

TEST_CASE("objective average matches a compensated sum") {
  SyntheticSpec spec;
  spec.size = 500;
  spec.dimension = 10;
  spec.noise_scale = 0.5;
  spec.seed = 3;
  const auto ds = std::make_shared<Dataset>(synthesize_dataset(spec));
  const RobustRegressionLoss obj(ds);
  Rng rng(17);
  const Point x = gauss_point(10, rng);

  double sum = 0.0, comp = 0.0;  // Kahan
  for (int i = 0; i < obj.num_components(); ++i) {
    const double y = obj.component_loss(i, x) - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  const double kahan_mean = sum / obj.num_components();
  CHECK(obj.value(x) == doctest::Approx(kahan_mean).epsilon(1e-12));
}

TEST_CASE("objective argument checks") {
  const auto ds = one_row({{1, 1.0}}, 1.0, 2, DatasetKind::kRegressionTargets);
  const RobustRegressionLoss obj(ds);
  CHECK_THROWS_AS(obj.component_loss(0, Point::Zero(3)), InvalidArgument);
  CHECK_THROWS_AS(obj.component_loss(1, Point::Zero(2)), InvalidArgument);
  CHECK_THROWS_AS(obj.component_gradient(-1, Point::Zero(2)), InvalidArgument);
}

TEST_CASE("gradient table keeps an exact running mean") {
  GradientTable table(5, 2);
  CHECK(table.mean().norm() == 0.0);
  Point g(2);
  g << 2.0, -4.0;
  table.replace(2, g);
  CHECK(table.mean()[0] == doctest::Approx(0.4));
  CHECK(table.mean()[1] == doctest::Approx(-0.8));
  CHECK((table.entry(2) - g).norm() == 0.0);
  CHECK(table.entry(0).norm() == 0.0);

  Rng rng(123);
  GradientTable big(50, 8);
  for (int step = 0; step < 100000; ++step) {
    big.replace(static_cast<int>(rng.uniform_below(50)), gauss_point(8, rng));
  }
  CHECK(big.mean_drift() <= 1e-8);
}

TEST_CASE("synthetic regression with zero noise plants an exact model") {
  SyntheticSpec spec;
  spec.size = 40;
  spec.dimension = 6;
  spec.noise_scale = 0.0;
  spec.seed = 11;
  Point planted;
  const auto ds = std::make_shared<Dataset>(synthesize_dataset(spec, &planted));
  REQUIRE(planted.size() == 6);
  const RobustRegressionLoss obj(ds);
  CHECK(obj.value(planted) == 0.0);
  CHECK(obj.full_gradient(planted).norm() == 0.0);

  // determinism: same spec, same bytes
  const Dataset again = synthesize_dataset(spec);
  CHECK(*ds == again);
}

TEST_CASE("synthetic classification emits valid labels") {
  SyntheticSpec spec;
  spec.task = SyntheticSpec::Task::kClassification;
  spec.size = 60;
  spec.dimension = 4;
  spec.noise_scale = 1.0;
  spec.seed = 12;
  const Dataset ds = synthesize_dataset(spec);
  CHECK(ds.kind() == DatasetKind::kBinaryLabels);
  bool saw_pos = false, saw_neg = false;
  for (int i = 0; i < ds.size(); ++i) {
    CHECK((ds.target(i) == 1.0 || ds.target(i) == -1.0));
    saw_pos = saw_pos || ds.target(i) == 1.0;
    saw_neg = saw_neg || ds.target(i) == -1.0;
  }
  CHECK(saw_pos);
  CHECK(saw_neg);
}
