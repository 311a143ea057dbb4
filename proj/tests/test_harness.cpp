#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "doctest.h"
#include "vropt/bounds.hpp"
#include "vropt/errors.hpp"
#include "vropt/experiment.hpp"
#include "vropt/objective.hpp"
#include "vropt/rng.hpp"
#include "vropt/schedule.hpp"
#include "vropt/svg_plot.hpp"
#include "vropt/trace.hpp"

using namespace vropt;

namespace {

std::shared_ptr<const QuadraticComponents> sphere_obj(int n, int d, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Point> centers;
  for (int i = 0; i < n; ++i) {
    Point c(d);
    for (int j = 0; j < d; ++j) c[j] = rng.normal();
    centers.push_back(std::move(c));
  }
  return std::make_shared<QuadraticComponents>(QuadraticComponents::spheres(std::move(centers)));
}

std::vector<std::shared_ptr<const Objective>> sphere_clients(int n, int m, int d,
                                                             std::uint64_t seed) {
  std::vector<std::shared_ptr<const Objective>> out;
  for (int i = 0; i < n; ++i)
    out.push_back(sphere_obj(m, d, seed + static_cast<std::uint64_t>(i)));
  return out;
}

int count_occurrences(const std::string& haystack, const std::string& needle) {
  int count = 0;
  for (std::size_t pos = haystack.find(needle); pos != std::string::npos;
       pos = haystack.find(needle, pos + needle.size()))
    ++count;
  return count;
}

ExperimentConfig zerosarah_config(long iters, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.algorithm = "zerosarah";
  cfg.max_iters = iters;
  cfg.seed = seed;
  cfg.x0 = "ones";
  return cfg;
}

}  // namespace

TEST_CASE("configs parse into the documented fields") {
  const ExperimentConfig cfg = parse_config_text(
      "# a small smoke experiment\n"
      "synthetic = regression\n"
      "synthetic_size = 40\n"
      "synthetic_dim = 5\n"
      "synthetic_noise = 0.5\n"
      "synthetic_seed = 7\n"
      "objective = robust_regression\n"
      "algorithm = zerosarah\n"
      "preset = cor2\n"
      "eta_scale = 0.5   # half the admissible stepsize\n"
      "\n"
      "max_iters = 50\n"
      "cadence = 10\n"
      "seed = 42\n"
      "x0 = gaussian\n"
      "x0_scale = 2.0\n"
      "label = demo\n"
      "trace_out = /tmp/demo.csv\n");
  REQUIRE(cfg.synthetic.has_value());
  CHECK(cfg.synthetic->size == 40);
  CHECK(cfg.synthetic->dimension == 5);
  CHECK(cfg.synthetic->noise_scale == 0.5);
  CHECK(cfg.synthetic->seed == 7);
  CHECK(cfg.synthetic->task == SyntheticSpec::Task::kRegression);
  CHECK(cfg.objective_family == "robust_regression");
  CHECK(cfg.algorithm == "zerosarah");
  CHECK(cfg.preset == "cor2");
  CHECK(cfg.extras.stepsize_scale == 0.5);
  CHECK_FALSE(cfg.extras.stepsize_override.has_value());
  CHECK(cfg.max_iters == 50);
  CHECK(cfg.cadence == 10);
  CHECK(cfg.seed == 42);
  CHECK(cfg.x0 == "gaussian");
  CHECK(cfg.x0_scale == 2.0);
  CHECK(cfg.label == "demo");
  CHECK(cfg.trace_out == "/tmp/demo.csv");
  CHECK_FALSE(cfg.report_bound);
}

TEST_CASE("config parse errors carry line numbers") {
  try {
    parse_config_text("seed = 1\nbogus = 2\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  try {
    parse_config_text("seed = 1\nseed = 2\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  try {
    parse_config_text("synthetic = regression\nsynthetic_size = nope\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_config_text("synthetic = sideways\n"), ParseError);
  CHECK_THROWS_AS(parse_config_text("dataset = mg\ncadence = 0\n"), ParseError);
  CHECK_THROWS_AS(parse_config_text("dataset = mg\nlambda = 1.5\n"), ParseError);
  CHECK_THROWS_AS(parse_config_text("dataset = mg\nx0 = sideways\n"), ParseError);
  CHECK_THROWS_AS(parse_config_text("dataset = mg\nalgorithm = sgd\n"), ParseError);
  CHECK_THROWS_AS(parse_config_text("dataset = mg\npreset = cor9\n"), ParseError);
}

TEST_CASE("cross-field config rules") {
  // exactly one dataset source
  CHECK_THROWS_AS(parse_config_text("seed = 1\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_config_text("dataset = mg\nsynthetic = regression\n"
                                    "synthetic_size = 4\nsynthetic_dim = 2\n"),
                  InvalidArgument);
  CHECK_THROWS_AS(parse_config_text("synthetic = regression\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_config_text("synthetic_dim = 4\ndataset = mg\n"), ParseError);

  // preset names are tied to their algorithm family
  CHECK_THROWS_AS(parse_config_text("dataset = mg\npreset = cor2d\n"), InvalidArgument);
  CHECK_THROWS_AS(
      parse_config_text("dataset = mg\nalgorithm = d-zerosarah\nn_clients = 2\npreset = cor1\n"),
      InvalidArgument);
  CHECK_THROWS_AS(parse_config_text("dataset = mg\nalgorithm = sarah\npreset = cor1\n"),
                  InvalidArgument);
  CHECK_THROWS_AS(parse_config_text("dataset = mg\nalgorithm = gd\npreset = custom\n"),
                  InvalidArgument);

  // client counts belong to the distributed side
  CHECK_THROWS_AS(parse_config_text("dataset = mg\nn_clients = 3\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_config_text("dataset = mg\nalgorithm = d-zerosarah\n"), InvalidArgument);

  // bound reports exist for the zerosarah family only
  CHECK_THROWS_AS(parse_config_text("dataset = mg\nalgorithm = sarah\nreport_bound = true\n"),
                  InvalidArgument);

  // l2 pairs with the sigmoid family
  CHECK_THROWS_AS(
      parse_config_text("dataset = mg\nobjective = robust_regression\nl2 = 0.1\n"),
      InvalidArgument);
  const ExperimentConfig auto_l2 =
      parse_config_text("dataset = mushrooms\nobjective = sigmoid_squared\nl2 = auto\n");
  CHECK_FALSE(auto_l2.l2.has_value());
  const ExperimentConfig fixed_l2 =
      parse_config_text("dataset = mushrooms\nobjective = sigmoid_squared\nl2 = 0.25\n");
  CHECK(fixed_l2.l2 == 0.25);
}

TEST_CASE("a config with no budget keys gets the iteration default") {
  const ExperimentConfig cfg = parse_config_text("dataset = mg\n");
  CHECK(cfg.max_iters == 1000);
  CHECK(cfg.max_paper_count == 0);
}

TEST_CASE("exact descent on a centered quadratic stops in one step") {
  // single component 0.5 ||x||^2, unit stepsize: x1 = x0 - grad = 0 exactly
  std::vector<Point> centers{Point::Zero(4)};
  const auto obj =
      std::make_shared<QuadraticComponents>(QuadraticComponents::spheres(std::move(centers)));

  ExperimentConfig cfg;
  cfg.algorithm = "gd";
  cfg.extras.stepsize_override = 1.0;
  cfg.max_iters = 3;
  cfg.x0 = "ones";
  const ExperimentResult res = run_experiment(cfg, obj);

  REQUIRE(res.trace.records.size() == 4);
  CHECK(res.trace.records[0].grad_norm == doctest::Approx(2.0));  // ||ones(4)||
  CHECK(res.trace.records[1].grad_norm == 0.0);
  CHECK(res.trace.records[1].objective == 0.0);
  CHECK(res.trace.records[1].paper_count == 1);
  CHECK(res.trace.records[1].full_batch_event);
  CHECK(res.counters.full_batch_events == 3);
  CHECK(res.final_iterate.norm() == 0.0);
}

TEST_CASE("sqrt-batch runs never trip the full-batch flag") {
  const auto obj = sphere_obj(25, 3, 301);
  const ExperimentResult res = run_experiment(zerosarah_config(60, 9), obj);

  CHECK(res.iterations == 60);
  REQUIRE(res.trace.records.size() == 13);  // cadence defaults to ceil(sqrt(25)) = 5
  CHECK(res.trace.records.back().iter == 60);
  for (const auto& rec : res.trace.records) CHECK_FALSE(rec.full_batch_event);
  CHECK(res.counters.paper_count == 5 + 59 * 5);
  CHECK(res.counters.actual_count == 5 + 59 * 10);
  CHECK(res.counters.full_batch_events == 0);
  CHECK(res.trace.records.back().paper_count == res.counters.paper_count);
  CHECK_FALSE(res.bound.has_value());  // not requested
}

TEST_CASE("the same config and seed reproduce the trace byte for byte") {
  const auto obj = sphere_obj(16, 3, 77);
  const ExperimentConfig cfg = zerosarah_config(40, 1234);
  const std::string a = trace_to_csv(run_experiment(cfg, obj).trace);
  const std::string b = trace_to_csv(run_experiment(cfg, obj).trace);
  CHECK(a == b);

  ExperimentConfig other = cfg;
  other.seed = 1235;
  CHECK(trace_to_csv(run_experiment(other, obj).trace) != a);

  const auto clients = sphere_clients(3, 9, 3, 500);
  ExperimentConfig dcfg;
  dcfg.algorithm = "d-zerosarah";
  dcfg.max_iters = 25;
  dcfg.seed = 99;
  dcfg.x0 = "ones";
  const std::string da = trace_to_csv(run_distributed_experiment(dcfg, clients).trace);
  const std::string db = trace_to_csv(run_distributed_experiment(dcfg, clients).trace);
  CHECK(da == db);
}

TEST_CASE("measurement cadence has no effect on the gradient counters") {
  const auto obj = sphere_obj(25, 3, 301);
  ExperimentConfig sparse = zerosarah_config(50, 4);
  sparse.cadence = 1000000;
  ExperimentConfig dense = zerosarah_config(50, 4);
  dense.cadence = 1;

  const ExperimentResult rs = run_experiment(sparse, obj);
  const ExperimentResult rd = run_experiment(dense, obj);
  CHECK(rs.counters.paper_count == rd.counters.paper_count);
  CHECK(rs.counters.actual_count == rd.counters.actual_count);
  CHECK(rs.counters.full_batch_events == rd.counters.full_batch_events);
  CHECK(rs.trace.records.size() == 2);   // start plus final
  CHECK(rd.trace.records.size() == 51);  // every iteration
  CHECK((rs.final_iterate - rd.final_iterate).norm() == 0.0);
}

TEST_CASE("the paper-count budget stops the run just past the line") {
  const auto obj = sphere_obj(25, 3, 301);
  ExperimentConfig cfg = zerosarah_config(0, 8);
  cfg.max_iters = 0;
  cfg.max_paper_count = 137;
  const ExperimentResult res = run_experiment(cfg, obj);
  CHECK(res.counters.paper_count >= 137);           // ran until the budget was spent
  CHECK(res.counters.paper_count <= 137 + 5);       // overshoot bounded by one batch
  CHECK(res.trace.records.back().iter == res.iterations);
}

TEST_CASE("a config with no budget at all is rejected at run time") {
  const auto obj = sphere_obj(9, 2, 3);
  ExperimentConfig cfg = zerosarah_config(0, 1);
  cfg.max_iters = 0;
  cfg.max_paper_count = 0;
  CHECK_THROWS_AS(run_experiment(cfg, obj), InvalidArgument);
}

TEST_CASE("traces survive a serialization round trip unchanged") {
  const auto obj = sphere_obj(16, 3, 21);
  const ExperimentResult res = run_experiment(zerosarah_config(30, 6), obj);
  const std::string csv = trace_to_csv(res.trace);
  const Trace back = parse_trace_csv_text(csv);
  CHECK(trace_to_csv(back) == csv);
  REQUIRE(back.records.size() == res.trace.records.size());
  for (std::size_t i = 0; i < back.records.size(); ++i) {
    CHECK(back.records[i].grad_norm == res.trace.records[i].grad_norm);
    CHECK(back.records[i].objective == res.trace.records[i].objective);
  }

  // distributed column and the divergence marker
  Trace dist;
  dist.distributed = true;
  dist.diverged = true;
  dist.diverged_at = 7;
  TraceRecord r0;
  r0.iter = 0;
  r0.grad_norm = 0.125;
  r0.objective = 1.0 / 3.0;
  dist.records.push_back(r0);
  TraceRecord r1;
  r1.iter = 1;
  r1.paper_count = 12;
  r1.actual_count = 24;
  r1.grad_norm = 3.0e-17;
  r1.objective = 0.25;
  r1.full_batch_event = true;
  r1.sampled_clients = {0, 2, 5};
  dist.records.push_back(r1);

  const std::string dcsv = trace_to_csv(dist);
  const Trace dback = parse_trace_csv_text(dcsv);
  CHECK(dback.distributed);
  CHECK(dback.diverged);
  CHECK(dback.diverged_at == 7);
  REQUIRE(dback.records.size() == 2);
  CHECK(dback.records[0].sampled_clients.empty());
  CHECK(dback.records[1].sampled_clients == std::vector<int>{0, 2, 5});
  CHECK(dback.records[1].grad_norm == 3.0e-17);
  CHECK(trace_to_csv(dback) == dcsv);

  CHECK_THROWS_AS(parse_trace_csv_text(""), ParseError);
  CHECK_THROWS_AS(parse_trace_csv_text("iter,nope\n"), ParseError);
  const std::string head = "iter,paper_count,actual_count,grad_norm,objective,full_batch_event\n";
  CHECK_THROWS_AS(parse_trace_csv_text(head + "0,0,0,1.0,1.0,2\n"), ParseError);
  CHECK_THROWS_AS(parse_trace_csv_text(head + "0,0,0,1.0\n"), ParseError);
}

TEST_CASE("trace files round trip through the filesystem") {
  const auto obj = sphere_obj(9, 2, 5);
  const ExperimentResult res = run_experiment(zerosarah_config(10, 2), obj);
  const auto path =
      (std::filesystem::temp_directory_path() / "vropt_harness_trace_test.csv").string();
  write_trace_csv_file(res.trace, path);
  const Trace back = load_trace_csv(path);
  CHECK(back.label == "vropt_harness_trace_test");
  Trace relabeled = back;
  relabeled.label = res.trace.label;
  CHECK(trace_to_csv(relabeled) == trace_to_csv(res.trace));
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_trace_csv(path), DataNotFound);
}

TEST_CASE("plots carry one polyline per trace and markers only for full batches") {
  const auto obj = sphere_obj(25, 3, 301);
  ExperimentConfig quiet = zerosarah_config(40, 11);
  quiet.label = "quiet";
  const Trace no_events = run_experiment(quiet, obj).trace;

  ExperimentConfig loud;
  loud.algorithm = "gd";
  loud.max_iters = 6;
  loud.seed = 1;
  loud.x0 = "ones";
  loud.label = "noisy";
  const Trace all_events = run_experiment(loud, obj).trace;  // every step is a full batch
  const int loud_records = static_cast<int>(all_events.records.size());

  const std::string svg = emit_plot_svg({no_events, all_events}, PlotOptions{"demo", "x", "y"});
  CHECK(count_occurrences(svg, "<polyline") == 2);
  CHECK(count_occurrences(svg, "<circle") == loud_records - 1);  // record 0 predates any step
  CHECK(svg.find("viewBox=\"0 0 960 600\"") != std::string::npos);
  CHECK(svg.find("quiet") != std::string::npos);
  CHECK(svg.find("noisy") != std::string::npos);
  CHECK(svg.find("demo") != std::string::npos);

  const std::string solo = emit_plot_svg({no_events});
  CHECK(count_occurrences(solo, "<polyline") == 1);
  CHECK(count_occurrences(solo, "<circle") == 0);
}

TEST_CASE("bound breakdown matches the closed forms") {
  // full first batch: the moment term vanishes and only 2 delta0 / sum eta is left
  const ParamSchedule full_first = schedule_preset("cor1", 16, 1.0);
  const BoundBreakdown a = theoretical_bound_breakdown(2.0, 3.0, full_first, 40);
  CHECK(a.moment_term == 0.0);
  const double eta = 1.0 / (1.0 + std::sqrt(8.0));
  CHECK(a.eta_sum == doctest::Approx(40.0 * eta).epsilon(1e-13));
  CHECK(a.total == doctest::Approx(2.0 * 2.0 / (40.0 * eta)).epsilon(1e-12));

  // sqrt batches: both terms, against an independent evaluation of the formula
  const ParamSchedule sqrt_sched = schedule_preset("cor2", 16, 1.0);
  const BoundBreakdown b = theoretical_bound_breakdown(2.0, 3.0, sqrt_sched, 25);
  const double lam = 4.0 / 32.0;
  const double gamma0 = eta / (2.0 * lam);
  const double alpha0 = 2.0 * 16.0 * lam * eta / 16.0;
  const double descent = 2.0 * 2.0 / (25.0 * eta);
  const double moment = (16.0 - 4.0) * (4.0 * gamma0 + 2.0 * alpha0 * 4.0) * 3.0 /
                        (16.0 * 4.0 * 25.0 * eta);
  CHECK(b.gamma0 == doctest::Approx(gamma0).epsilon(1e-13));
  CHECK(b.alpha0 == doctest::Approx(alpha0).epsilon(1e-13));
  CHECK(b.descent_term == doctest::Approx(descent).epsilon(1e-12));
  CHECK(b.moment_term == doctest::Approx(moment).epsilon(1e-12));
  CHECK(b.total == doctest::Approx(descent + moment).epsilon(1e-12));
  CHECK(theoretical_bound(2.0, 3.0, sqrt_sched, 25) == b.total);

  CHECK_THROWS_AS(theoretical_bound_breakdown(-1.0, 3.0, sqrt_sched, 25), InvalidArgument);
  CHECK_THROWS_AS(theoretical_bound_breakdown(2.0, 3.0, sqrt_sched, 0), InvalidArgument);

  // distributed: full first round kills the moment term
  const DistSchedule dist_full = dist_schedule_preset("cor1d", 4, 9, 1.0);
  const BoundBreakdown c = theoretical_bound_dist_breakdown(1.5, 2.0, dist_full, 10);
  CHECK(c.moment_term == 0.0);
  CHECK(c.theta0 == 0.0);
  CHECK(c.total == doctest::Approx(2.0 * 1.5 / (10.0 * eta)).epsilon(1e-12));

  // distributed sqrt sampling against the independent evaluation
  const DistSchedule dist_sqrt = dist_schedule_preset("cor2d", 4, 9, 1.0);
  const BoundBreakdown e = theoretical_bound_dist_breakdown(1.5, 2.0, dist_sqrt, 10);
  const double nm = 36.0, sb = 6.0, dlam = 1.0 / 12.0;
  const double theta0 = nm / ((nm - 1.0) * dlam) + 4.0 * nm * dlam * sb / (sb * sb);
  const double dmoment = (nm - sb) * eta * theta0 * 2.0 / (nm * sb * 10.0 * eta);
  CHECK(e.theta0 == doctest::Approx(theta0).epsilon(1e-13));
  CHECK(e.moment_term == doctest::Approx(dmoment).epsilon(1e-12));
  CHECK(e.total == doctest::Approx(2.0 * 1.5 / (10.0 * eta) + dmoment).epsilon(1e-12));
}

TEST_CASE("bound reports come back from runs that ask for them") {
  const auto obj = sphere_obj(16, 3, 88);
  ExperimentConfig cfg = zerosarah_config(40, 17);
  cfg.preset = "cor1";
  cfg.report_bound = true;
  const ExperimentResult res = run_experiment(cfg, obj, obj->min_value());

  REQUIRE(res.bound.has_value());
  const BoundReport& rep = *res.bound;
  CHECK(rep.delta0_exact);
  const double f0 = res.trace.records.front().objective;
  CHECK(rep.delta0 == f0 - obj->min_value());
  CHECK(rep.g0 > 0.0);
  CHECK(rep.iterations == 40);
  CHECK(rep.breakdown.moment_term == 0.0);
  CHECK(rep.breakdown.total > 0.0);
  CHECK(rep.output_index >= 0);
  CHECK(rep.output_index < 40);
  CHECK(rep.output_grad_sq >= 0.0);

  // without the exact optimum the gap falls back to the best observed value
  const ExperimentResult proxy = run_experiment(cfg, obj);
  REQUIRE(proxy.bound.has_value());
  CHECK_FALSE(proxy.bound->delta0_exact);
  CHECK(proxy.bound->delta0 <= rep.delta0 + 1e-12);

  // a supplied g0 is used verbatim
  ExperimentConfig pinned = cfg;
  pinned.extras.g0 = 123.0;
  const ExperimentResult pinned_res = run_experiment(pinned, obj, obj->min_value());
  REQUIRE(pinned_res.bound.has_value());
  CHECK(pinned_res.bound->g0 == 123.0);

  // overriding the stepsize voids the guarantee, so the run refuses
  ExperimentConfig off = cfg;
  off.extras.stepsize_override = 0.01;
  CHECK_THROWS_AS(run_experiment(off, obj), InvalidArgument);
}

TEST_CASE("distributed runs report their rounds in the trace") {
  const auto clients = sphere_clients(4, 12, 3, 900);
  ExperimentConfig cfg;
  cfg.algorithm = "d-zerosarah";
  cfg.max_iters = 30;
  cfg.seed = 15;
  cfg.x0 = "ones";
  cfg.n_clients = 4;  // consistent with the injected list
  const ExperimentResult res = run_distributed_experiment(cfg, clients);

  CHECK(res.trace.distributed);
  REQUIRE(res.trace.records.size() == 31);  // cadence defaults to every round
  CHECK(res.trace.records[0].sampled_clients.empty());
  for (std::size_t i = 1; i < res.trace.records.size(); ++i) {
    CHECK(res.trace.records[i].sampled_clients.size() == 2);  // ceil(sqrt(4))
  }
  CHECK(res.counters.paper_count == 30 * 8);  // 2 clients x 4 samples every round
  CHECK(res.counters.full_batch_events == 0);

  ExperimentConfig wrong = cfg;
  wrong.n_clients = 5;
  CHECK_THROWS_AS(run_distributed_experiment(wrong, clients), InvalidArgument);
  CHECK_THROWS_AS(run_experiment(cfg, sphere_obj(9, 3, 1)), InvalidArgument);
}

TEST_CASE("the federated epoch baseline synchronizes through the harness") {
  const auto clients = sphere_clients(4, 12, 3, 901);
  ExperimentConfig cfg;
  cfg.algorithm = "d-sarah";
  cfg.max_iters = 10;
  cfg.seed = 3;
  cfg.x0 = "ones";
  const ExperimentResult res = run_distributed_experiment(cfg, clients);

  // epoch length defaults to ceil(sqrt(48)) = 7: full rounds at 0 and 7
  CHECK(res.counters.full_batch_events == 2);
  CHECK(res.counters.paper_count == 2 * 48 + 8 * 8);
  CHECK(res.trace.records[1].sampled_clients == std::vector<int>{0, 1, 2, 3});
  CHECK(res.trace.records[1].full_batch_event);
  CHECK_FALSE(res.trace.records[2].full_batch_event);
}

TEST_CASE("start point selection") {
  const auto obj = sphere_obj(9, 4, 55);
  ExperimentConfig cfg = zerosarah_config(5, 10);
  cfg.x0 = "ones";
  cfg.x0_scale = 2.0;
  const ExperimentResult res = run_experiment(cfg, obj);
  CHECK(res.trace.records[0].objective ==
        doctest::Approx(obj->value(Point::Constant(4, 2.0))).epsilon(1e-15));

  ExperimentConfig g1 = zerosarah_config(5, 10);
  g1.x0 = "gaussian";
  ExperimentConfig g2 = zerosarah_config(5, 11);
  g2.x0 = "gaussian";
  const double f1 = run_experiment(g1, obj).trace.records[0].objective;
  const double f1_again = run_experiment(g1, obj).trace.records[0].objective;
  const double f2 = run_experiment(g2, obj).trace.records[0].objective;
  CHECK(f1 == f1_again);
  CHECK(f1 != f2);

  ExperimentConfig bad = zerosarah_config(5, 10);
  bad.x0 = "sideways";
  CHECK_THROWS_AS(run_experiment(bad, obj), InvalidArgument);
}

TEST_CASE("custom preset knobs are validated at run time") {
  const auto obj = sphere_obj(12, 3, 44);
  ExperimentConfig cfg = zerosarah_config(10, 5);
  cfg.preset = "custom";
  cfg.extras.stepsize_override = 0.05;
  cfg.batch = 3;
  cfg.lambda = 0.25;
  const ExperimentResult res = run_experiment(cfg, obj);  // batch0 defaults to batch
  CHECK(res.counters.paper_count == 10 * 3);

  ExperimentConfig missing = cfg;
  missing.lambda.reset();
  CHECK_THROWS_AS(run_experiment(missing, obj), InvalidArgument);

  ExperimentConfig scaled = cfg;
  scaled.extras.stepsize_scale = 2.0;
  CHECK_THROWS_AS(run_experiment(scaled, obj), InvalidArgument);

  ExperimentConfig stray = zerosarah_config(10, 5);
  stray.preset = "cor2";
  stray.batch = 3;
  CHECK_THROWS_AS(run_experiment(stray, obj), InvalidArgument);
}

TEST_CASE("config loading reports missing files") {
  CHECK_THROWS_AS(load_config("/nonexistent/vropt_config.cfg"), DataNotFound);
}

TEST_CASE("diverging runs are flagged instead of reported as converged") {
  // On the saturating loss a huge step keeps the iterate finite while the
  // objective blows up, so only the recorder can notice. Quadratics overflow
  // inside the step itself. Both paths must end in a flagged trace that
  // keeps its healthy records and round-trips through CSV.
  const ExperimentConfig quiet = parse_config_text(
      "synthetic = regression\n"
      "synthetic_size = 20\n"
      "synthetic_dim = 3\n"
      "algorithm = gd\n"
      "eta = 1e308\n"
      "max_iters = 50\n");
  const ExperimentResult res = run_experiment(quiet);
  CHECK(res.trace.diverged);
  CHECK(res.trace.diverged_at == 5);  // first cadence point, ceil(sqrt(20))
  CHECK(res.trace.records.size() == 1);
  CHECK(res.trace.records[0].iter == 0);
  CHECK(std::isfinite(res.trace.records[0].objective));
  CHECK(res.iterations == 5);
  const std::string csv = trace_to_csv(res.trace);
  const Trace back = parse_trace_csv_text(csv);
  CHECK(back.diverged);
  CHECK(back.diverged_at == 5);
  CHECK(back.records.size() == 1);

  ExperimentConfig loud = zerosarah_config(50, 6);
  loud.algorithm = "gd";
  loud.extras.stepsize_override = 1e308;
  const ExperimentResult boom = run_experiment(loud, sphere_obj(9, 3, 8));
  CHECK(boom.trace.diverged);
  CHECK(boom.trace.diverged_at < 5);
  CHECK(boom.trace.records.size() == 1);
}

TEST_CASE("configs drive full runs end to end") {
  const ExperimentConfig cfg = parse_config_text(
      "synthetic = regression\n"
      "synthetic_size = 36\n"
      "synthetic_dim = 4\n"
      "synthetic_noise = 0.3\n"
      "synthetic_seed = 2\n"
      "algorithm = zerosarah\n"
      "max_iters = 40\n"
      "seed = 21\n");
  const ExperimentResult res = run_experiment(cfg);
  CHECK(res.iterations == 40);
  CHECK(res.counters.paper_count == 6 + 39 * 6);  // ceil(sqrt(36)) = 6 per step

  const ExperimentConfig dcfg = parse_config_text(
      "synthetic = regression\n"
      "synthetic_size = 36\n"
      "synthetic_dim = 4\n"
      "synthetic_seed = 2\n"
      "algorithm = d-zerosarah\n"
      "n_clients = 4\n"
      "max_iters = 20\n"
      "seed = 21\n");
  const ExperimentResult dres = run_distributed_experiment(dcfg);
  CHECK(dres.trace.distributed);
  CHECK(dres.iterations == 20);
  // 4 clients of 9 samples: 2 clients x 3 samples per round
  CHECK(dres.counters.paper_count == 20 * 6);

  // the same seed with the other entry point must give the same data split
  const ExperimentResult dres2 = run_distributed_experiment(dcfg);
  CHECK(trace_to_csv(dres2.trace) == trace_to_csv(dres.trace));
}
