#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vropt/bounds.hpp"
#include "vropt/objective.hpp"
#include "vropt/schedule.hpp"
#include "vropt/synthetic.hpp"
#include "vropt/trace.hpp"
#include "vropt/types.hpp"

namespace vropt {

// One experiment, as described by a flat key=value config file. Parsed
// configs always name exactly one dataset source; configs built in code may
// leave all three empty and supply the objective directly to the run overload
// that takes one.
struct ExperimentConfig {
  // dataset source (pick one): a registry name resolved under the data
  // directory, an explicit file path, or a synthetic generator spec.
  std::string dataset;
  std::string dataset_file;
  std::optional<SyntheticSpec> synthetic;

  // empty = pick by label kind (regression targets -> robust_regression,
  // binary labels -> sigmoid_squared).
  std::string objective_family;
  std::optional<double> l2;  // sigmoid_squared only; unset = auto

  std::string algorithm = "zerosarah";
  std::string preset;       // empty = cor2 / cor2d for the zerosarah family
  ScheduleExtras extras;    // stepsize override/scale, epsilon, g0
  std::optional<double> smoothness;  // skip the data-driven L estimate

  // custom-preset knobs; the sarah family reads epoch_length/batch/clients.
  std::optional<int> batch0, batch, clients0, clients, epoch_length;
  std::optional<double> lambda;

  int n_clients = 0;  // distributed runs only

  // budget: whichever limit is hit first stops the run. A parsed config with
  // neither key gets max_iters = 1000.
  long max_iters = 0;
  long long max_paper_count = 0;

  long cadence = 0;  // 0 = default: every ceil(sqrt(n)) steps, every round distributed

  std::uint64_t seed = 0;
  std::string x0 = "zero";  // zero | ones | gaussian
  double x0_scale = 1.0;

  std::string trace_out;  // CSV path; callers decide when to write
  std::string plot_out;   // SVG path
  std::string label;      // legend name; empty = algorithm
  bool report_bound = false;
};

// key=value per line, '#' starts a comment, blank lines skipped. Unknown or
// duplicate keys and malformed values raise ParseError with the line number;
// cross-field violations raise InvalidArgument.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Emitted only when report_bound is set (theoretical presets only). delta0 is
// f(x^0) minus the best objective seen by the measurements, a proxy for
// f(x^0) - f*, unless the caller supplied the exact optimum. The output
// iterate x_hat is drawn by the eta-weighted rule, folded into the run as
// weighted reservoir selection so no iterate history is kept.
struct BoundReport {
  BoundBreakdown breakdown;
  long iterations = 0;
  double delta0 = 0.0;
  bool delta0_exact = false;
  double g0 = 0.0;
  double output_grad_sq = 0.0;  // ||grad f(x_hat)||^2
  long output_index = 0;        // which iterate was selected
};

struct ExperimentResult {
  Trace trace;
  GradCounter counters;
  Point final_iterate;
  long iterations = 0;
  std::optional<BoundReport> bound;
};

// Sequential algorithms (zerosarah, sarah, gd). The two-argument form
// resolves the dataset named by the config; the three-argument form runs the
// supplied objective instead (exact_min, when known, makes delta0 exact).
ExperimentResult run_experiment(const ExperimentConfig& cfg);
ExperimentResult run_experiment(const ExperimentConfig& cfg, std::shared_ptr<const Objective> obj,
                                std::optional<double> exact_min = std::nullopt);

// Distributed algorithms (d-zerosarah, d-sarah). The config form loads the
// dataset and splits it into n_clients equal shards; the injected form takes
// one objective per client (all with matching shapes).
ExperimentResult run_distributed_experiment(const ExperimentConfig& cfg);
ExperimentResult run_distributed_experiment(const ExperimentConfig& cfg,
                                            std::vector<std::shared_ptr<const Objective>> clients,
                                            std::optional<double> exact_min = std::nullopt);

}  // namespace vropt
