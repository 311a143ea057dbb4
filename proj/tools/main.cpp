#include <algorithm>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vropt/errors.hpp"
#include "vropt/experiment.hpp"
#include "vropt/libsvm.hpp"
#include "vropt/objective.hpp"
#include "vropt/oracles.hpp"
#include "vropt/rng.hpp"
#include "vropt/svg_plot.hpp"
#include "vropt/synthetic.hpp"
#include "vropt/trace.hpp"

namespace {

bool distributed_algorithm(const std::string& algorithm) {
  return algorithm.rfind("d-", 0) == 0;
}

void print_summary(std::ostream& out, const vropt::ExperimentResult& res) {
  const vropt::Trace& trace = res.trace;
  out << "label: " << trace.label << "\n";
  out << "iterations: " << res.iterations << "  paper_count: " << res.counters.paper_count
      << "  actual_count: " << res.counters.actual_count
      << "  full_batch_events: " << res.counters.full_batch_events << "\n";
  if (!trace.records.empty()) {
    const vropt::TraceRecord& last = trace.records.back();
    char line[160];
    std::snprintf(line, sizeof line, "final grad norm: %.6g  objective: %.6g\n", last.grad_norm,
                  last.objective);
    out << line;
  }
  if (res.bound) {
    const vropt::BoundReport& b = *res.bound;
    char line[320];
    std::snprintf(line, sizeof line,
                  "bound after %ld iterations: total=%.6g  descent term=%.6g  moment term=%.6g\n",
                  b.iterations, b.breakdown.total, b.breakdown.descent_term,
                  b.breakdown.moment_term);
    out << line;
    std::snprintf(line, sizeof line, "  delta0 (%s)=%.6g  g0=%.6g\n",
                  b.delta0_exact ? "exact" : "proxy", b.delta0, b.g0);
    out << line;
    std::snprintf(line, sizeof line, "  ||grad f(x_hat)||^2 = %.6g  (iterate %ld)\n",
                  b.output_grad_sq, b.output_index);
    out << line;
  }
  if (trace.diverged) {
    out << "diverged at iteration " << trace.diverged_at << "\n";
  }
}

int cmd_run(const std::string& config_path, bool want_distributed) {
  const vropt::ExperimentConfig cfg = vropt::load_config(config_path);
  if (distributed_algorithm(cfg.algorithm) != want_distributed) {
    std::cerr << "error: " << cfg.algorithm << " is a "
              << (want_distributed ? "sequential" : "distributed") << " algorithm; use "
              << (want_distributed ? "'vropt run'" : "'vropt run-dist'") << "\n";
    return 1;
  }
  const vropt::ExperimentResult res =
      want_distributed ? vropt::run_distributed_experiment(cfg) : vropt::run_experiment(cfg);

  if (!cfg.trace_out.empty()) {
    vropt::write_trace_csv_file(res.trace, cfg.trace_out);
    print_summary(std::cout, res);
    std::cout << "trace written to " << cfg.trace_out << "\n";
  } else {
    // Bare runs stream the CSV so it can be piped; the summary goes to stderr.
    vropt::write_trace_csv(res.trace, std::cout);
    print_summary(std::cerr, res);
  }
  if (!cfg.plot_out.empty()) {
    vropt::write_plot_svg_file({res.trace}, cfg.plot_out);
    std::cout << "plot written to " << cfg.plot_out << "\n";
  }
  return res.trace.diverged ? 2 : 0;
}

int cmd_plot(const std::vector<std::string>& csv_paths, const std::string& svg_out,
             const std::string& title) {
  std::vector<vropt::Trace> traces;
  traces.reserve(csv_paths.size());
  for (const std::string& path : csv_paths) traces.push_back(vropt::load_trace_csv(path));
  vropt::PlotOptions options;
  if (!title.empty()) options.title = title;
  vropt::write_plot_svg_file(traces, svg_out, options);
  std::cout << "plot written to " << svg_out << " (" << traces.size() << " trace"
            << (traces.size() == 1 ? "" : "s") << ")\n";
  return 0;
}

// ---- check: exhaustive verification of the estimator identities ----

vropt::Point gauss_point(int dim, vropt::Rng& rng) {
  vropt::Point x(dim);
  for (int i = 0; i < dim; ++i) x[i] = rng.normal();
  return x;
}

std::shared_ptr<vropt::QuadraticComponents> random_quadratic(int n, int dim, vropt::Rng& rng) {
  std::vector<vropt::QuadraticComponents::Component> comps;
  comps.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    vropt::Matrix b(dim, dim);
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < dim; ++c) b(r, c) = rng.normal();
    comps.push_back({b.transpose() * b, gauss_point(dim, rng)});
  }
  return std::make_shared<vropt::QuadraticComponents>(std::move(comps));
}

std::vector<vropt::Point> random_table(int n, int dim, vropt::Rng& rng) {
  std::vector<vropt::Point> table;
  table.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) table.push_back(gauss_point(dim, rng));
  return table;
}

struct CheckRow {
  std::string name;
  bool pass = false;
  std::string detail;
};

CheckRow check_estimator_moments() {
  const int dim = 3;
  const struct {
    int n, b;
    double lambda;
  } cases[] = {{4, 2, 0.25}, {6, 3, 0.1}, {5, 2, 1.0}};
  double worst_dev = 0.0;
  double min_slack = std::numeric_limits<double>::infinity();
  int states = 0;
  vropt::Rng rng(20240811);
  for (const auto& c : cases) {
    const auto obj = random_quadratic(c.n, dim, rng);
    for (int rep = 0; rep < 3; ++rep) {
      vropt::oracles::EstimatorSnapshot snap;
      snap.objective = obj.get();
      snap.x_curr = gauss_point(dim, rng);
      snap.x_prev = gauss_point(dim, rng);
      snap.v_prev = gauss_point(dim, rng);
      snap.table = random_table(c.n, dim, rng);
      snap.lambda = c.lambda;
      snap.batch = c.b;
      const auto report = vropt::oracles::exhaustive_estimator_moments(snap, obj->exact_smoothness());
      worst_dev = std::max(worst_dev, report.max_deviation);
      min_slack = std::min(min_slack, report.slack());
      ++states;
    }
  }
  char detail[160];
  std::snprintf(detail, sizeof detail, "max mean deviation %.2e, min variance slack %.2e (%d states)",
                worst_dev, min_slack, states);
  return {"estimator mean + variance", worst_dev <= 1e-10 && min_slack >= -1e-12, detail};
}

CheckRow check_table_drift() {
  const int dim = 3;
  double worst = 0.0;
  vropt::Rng rng(77002341);
  for (const int n : {4, 6}) {
    const auto obj = random_quadratic(n, dim, rng);
    vropt::oracles::TableDriftSnapshot snap;
    snap.objective = obj.get();
    snap.table = random_table(n, dim, rng);
    snap.batch = 2;
    const auto report = vropt::oracles::exhaustive_table_drift(snap, gauss_point(dim, rng));
    worst = std::max(worst, report.max_deviation);
  }
  char detail[96];
  std::snprintf(detail, sizeof detail, "max relative gap %.2e", worst);
  return {"stored-gradient freshness", worst <= 1e-10, detail};
}

CheckRow check_dist_mean() {
  const int dim = 2, n = 3, m = 4;
  vropt::Rng rng(550128);
  std::vector<std::shared_ptr<vropt::QuadraticComponents>> owners;
  vropt::oracles::DistEstimatorSnapshot snap;
  for (int i = 0; i < n; ++i) {
    owners.push_back(random_quadratic(m, dim, rng));
    snap.clients.push_back(owners.back().get());
    snap.tables.push_back(random_table(m, dim, rng));
  }
  snap.x_curr = gauss_point(dim, rng);
  snap.x_prev = gauss_point(dim, rng);
  snap.v_prev = gauss_point(dim, rng);
  snap.lambda = 0.25;
  snap.client_sample = 2;
  snap.batch = 2;
  const auto report = vropt::oracles::exhaustive_dist_estimator_mean(snap);
  char detail[96];
  std::snprintf(detail, sizeof detail, "mean deviation %.2e over %lld outcomes",
                report.max_deviation, report.outcomes);
  return {"federated estimator mean", report.max_deviation <= 1e-10, detail};
}

CheckRow check_finite_differences() {
  vropt::SyntheticSpec spec;
  spec.size = 6;
  spec.dimension = 4;
  spec.noise_scale = 0.3;
  spec.seed = 9;
  const auto reg_data = std::make_shared<vropt::Dataset>(vropt::synthesize_dataset(spec));
  spec.task = vropt::SyntheticSpec::Task::kClassification;
  spec.seed = 10;
  const auto cls_data = std::make_shared<vropt::Dataset>(vropt::synthesize_dataset(spec));

  vropt::Rng rng(311007);
  std::vector<std::shared_ptr<const vropt::Objective>> objectives = {
      std::make_shared<vropt::RobustRegressionLoss>(reg_data),
      std::make_shared<vropt::SigmoidSquaredLoss>(cls_data, 1e-3),
      random_quadratic(5, 4, rng),
  };
  double worst = 0.0;
  for (const auto& obj : objectives) {
    for (int probe = 0; probe < 5; ++probe) {
      const vropt::Point x = gauss_point(obj->dimension(), rng);
      const int i = probe % obj->num_components();
      const vropt::Point exact = obj->component_gradient(i, x);
      const vropt::Point approx =
          vropt::oracles::finite_difference_component_gradient(*obj, i, x, 1e-6);
      worst = std::max(worst, (exact - approx).norm() / std::max(1.0, exact.norm()));
    }
  }
  char detail[96];
  std::snprintf(detail, sizeof detail, "max relative error %.2e", worst);
  return {"finite-difference gradients", worst <= 1e-5, detail};
}

CheckRow check_descent_relation() {
  const int dim = 3, n = 5;
  vropt::Rng rng(424242);
  const auto obj = random_quadratic(n, dim, rng);
  const double L = obj->exact_smoothness();
  double min_gap = std::numeric_limits<double>::infinity();
  for (int rep = 0; rep < 10; ++rep) {
    const vropt::Point x = gauss_point(dim, rng);
    const vropt::Point v = gauss_point(dim, rng);
    const double eta = 0.9 / L;
    const vropt::Point x_next = x - eta * v;
    min_gap = std::min(min_gap, vropt::oracles::descent_relation_gap(*obj, L, x, x_next, v, eta));
  }
  char detail[96];
  std::snprintf(detail, sizeof detail, "min slack %.2e", min_gap);
  return {"one-step descent relation", min_gap >= -1e-9, detail};
}

int cmd_check() {
  const CheckRow rows[] = {
      check_estimator_moments(), check_table_drift(),      check_dist_mean(),
      check_finite_differences(), check_descent_relation(),
  };
  bool all = true;
  for (const CheckRow& row : rows) {
    std::printf("%s  %-28s %s\n", row.pass ? "PASS" : "FAIL", row.name.c_str(),
                row.detail.c_str());
    all = all && row.pass;
  }
  std::printf("%s\n", all ? "all checks passed" : "some checks FAILED");
  return all ? 0 : 1;
}

int cmd_datasets() {
  namespace fs = std::filesystem;
  const std::string dir = vropt::data_directory();
  std::printf("data directory: %s  (override with VROPT_DATA_DIR)\n\n", dir.c_str());
  std::printf("%-10s %8s %9s  %s\n", "name", "rows", "features", "file");
  for (const vropt::DatasetMeta& meta : vropt::known_datasets()) {
    std::string where = "missing";
    for (const std::string& candidate : {dir + "/" + meta.name, dir + "/" + meta.name + ".txt"}) {
      if (fs::exists(candidate)) {
        where = candidate;
        break;
      }
    }
    std::printf("%-10s %8d %9d  %s\n", meta.name.c_str(), meta.size, meta.dimension,
                where.c_str());
  }
  std::printf(
      "\nFiles are plain LIBSVM text, one 'label idx:val ...' line per sample.\n"
      "Fetch them from the LIBSVM dataset collection, for example:\n"
      "  curl -L -o %s/a9a https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/binary/a9a\n"
      "  curl -L -o %s/abalone "
      "https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/regression/abalone\n"
      "a9a, mushrooms, phishing and w8a live under binary/; abalone, mg, pyrim and\n"
      "triazines under regression/. Decompress any .bz2 download and drop the suffix.\n",
      dir.c_str(), dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"variance-reduced optimization workbench"};
  app.require_subcommand(1);

  std::string run_config;
  CLI::App* run = app.add_subcommand("run", "run a sequential experiment from a config file");
  run->add_option("config", run_config, "key=value config file")->required();

  std::string dist_config;
  CLI::App* run_dist =
      app.add_subcommand("run-dist", "run a federated experiment from a config file");
  run_dist->add_option("config", dist_config, "key=value config file")->required();

  CLI::App* check =
      app.add_subcommand("check", "verify the estimator identities by exhaustive enumeration");

  std::vector<std::string> csv_paths;
  std::string svg_out, title;
  CLI::App* plot = app.add_subcommand("plot", "draw convergence traces from CSVs into one SVG");
  plot->add_option("csv", csv_paths, "trace CSV files")->required();
  plot->add_option("-o,--output", svg_out, "output SVG path")->required();
  plot->add_option("--title", title, "plot title");

  CLI::App* datasets =
      app.add_subcommand("datasets", "list the named benchmark sets and how to fetch them");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_config, false);
    if (run_dist->parsed()) return cmd_run(dist_config, true);
    if (check->parsed()) return cmd_check();
    if (plot->parsed()) return cmd_plot(csv_paths, svg_out, title);
    if (datasets->parsed()) return cmd_datasets();
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
