#include "vropt/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <sstream>
#include <utility>

#include "vropt/errors.hpp"
#include "vropt/federation.hpp"
#include "vropt/libsvm.hpp"
#include "vropt/optimizers.hpp"
#include "vropt/rng.hpp"

namespace vropt {
namespace {

bool is_sequential(const std::string& algorithm) {
  return algorithm == "zerosarah" || algorithm == "sarah" || algorithm == "gd";
}

bool is_distributed(const std::string& algorithm) {
  return algorithm == "d-zerosarah" || algorithm == "d-sarah";
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

double to_real(const std::string& v, const std::string& key, long line) {
  errno = 0;
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE || !std::isfinite(x)) {
    throw ParseError("bad number for " + key + ": '" + v + "'", line);
  }
  return x;
}

long long to_int(const std::string& v, const std::string& key, long line) {
  errno = 0;
  char* end = nullptr;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE) {
    throw ParseError("bad integer for " + key + ": '" + v + "'", line);
  }
  return x;
}

std::uint64_t to_seed(const std::string& v, const std::string& key, long line) {
  errno = 0;
  char* end = nullptr;
  const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
  if (v.empty() || v[0] == '-' || end != v.c_str() + v.size() || errno == ERANGE) {
    throw ParseError("bad seed for " + key + ": '" + v + "'", line);
  }
  return x;
}

bool to_bool(const std::string& v, const std::string& key, long line) {
  const std::string w = lower(v);
  if (w == "true" || w == "1" || w == "yes" || w == "on") return true;
  if (w == "false" || w == "0" || w == "no" || w == "off") return false;
  throw ParseError("bad boolean for " + key + ": '" + v + "'", line);
}

long long positive_int(const std::string& v, const std::string& key, long line) {
  const long long x = to_int(v, key, line);
  if (x < 1) throw ParseError(key + " must be at least 1", line);
  return x;
}

// Raw pairs in file order, deduplicated. Values keep their case; the
// enum-like keys lowercase theirs at interpretation.
struct RawConfig {
  std::map<std::string, std::pair<std::string, long>> pairs;

  const std::pair<std::string, long>* find(const std::string& key) const {
    const auto it = pairs.find(key);
    return it == pairs.end() ? nullptr : &it->second;
  }
};

RawConfig read_pairs(std::istream& in) {
  RawConfig raw;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected key = value", lineno);
    const std::string key = lower(trim(line.substr(0, eq)));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError("empty key", lineno);
    if (value.empty()) throw ParseError("empty value for " + key, lineno);
    if (!raw.pairs.emplace(key, std::make_pair(value, lineno)).second) {
      throw ParseError("duplicate key " + key, lineno);
    }
  }
  return raw;
}

const char* const kKnownKeys[] = {
    "dataset",     "dataset_file",   "synthetic",    "synthetic_size", "synthetic_dim",
    "synthetic_noise", "synthetic_seed", "objective",    "l2",             "algorithm",
    "preset",      "eta",            "eta_scale",    "epsilon",        "g0",
    "smoothness",  "batch0",         "batch",        "lambda",         "clients0",
    "clients",     "epoch_length",   "n_clients",    "max_iters",      "max_paper_count",
    "cadence",     "seed",           "x0",           "x0_scale",       "trace_out",
    "plot_out",    "label",          "report_bound",
};

ExperimentConfig interpret(const RawConfig& raw) {
  for (const auto& [key, value] : raw.pairs) {
    const bool known = std::any_of(std::begin(kKnownKeys), std::end(kKnownKeys),
                                   [&](const char* k) { return key == k; });
    if (!known) throw ParseError("unknown key " + key, value.second);
  }

  ExperimentConfig cfg;
  const auto str = [&](const char* key, std::string* out) {
    if (const auto* p = raw.find(key)) *out = p->first;
  };
  str("dataset", &cfg.dataset);
  str("dataset_file", &cfg.dataset_file);
  str("trace_out", &cfg.trace_out);
  str("plot_out", &cfg.plot_out);
  str("label", &cfg.label);

  if (const auto* p = raw.find("synthetic")) {
    SyntheticSpec spec;
    const std::string task = lower(p->first);
    if (task == "regression") {
      spec.task = SyntheticSpec::Task::kRegression;
    } else if (task == "classification") {
      spec.task = SyntheticSpec::Task::kClassification;
    } else {
      throw ParseError("synthetic must be regression or classification", p->second);
    }
    cfg.synthetic = spec;
  }
  if (const auto* p = raw.find("synthetic_size")) {
    if (!cfg.synthetic) throw ParseError("synthetic_size without synthetic", p->second);
    cfg.synthetic->size = static_cast<int>(positive_int(p->first, "synthetic_size", p->second));
  }
  if (const auto* p = raw.find("synthetic_dim")) {
    if (!cfg.synthetic) throw ParseError("synthetic_dim without synthetic", p->second);
    cfg.synthetic->dimension = static_cast<int>(positive_int(p->first, "synthetic_dim", p->second));
  }
  if (const auto* p = raw.find("synthetic_noise")) {
    if (!cfg.synthetic) throw ParseError("synthetic_noise without synthetic", p->second);
    const double noise = to_real(p->first, "synthetic_noise", p->second);
    if (noise < 0) throw ParseError("synthetic_noise must be nonnegative", p->second);
    cfg.synthetic->noise_scale = noise;
  }
  if (const auto* p = raw.find("synthetic_seed")) {
    if (!cfg.synthetic) throw ParseError("synthetic_seed without synthetic", p->second);
    cfg.synthetic->seed = to_seed(p->first, "synthetic_seed", p->second);
  }
  if (cfg.synthetic && (cfg.synthetic->size < 1 || cfg.synthetic->dimension < 1)) {
    throw InvalidArgument("synthetic needs synthetic_size and synthetic_dim");
  }

  const int sources = (!cfg.dataset.empty() ? 1 : 0) + (!cfg.dataset_file.empty() ? 1 : 0) +
                      (cfg.synthetic ? 1 : 0);
  if (sources != 1) {
    throw InvalidArgument("config must name exactly one of dataset, dataset_file, synthetic");
  }

  if (const auto* p = raw.find("objective")) {
    const std::string fam = lower(p->first);
    if (fam != "robust_regression" && fam != "sigmoid_squared") {
      throw ParseError("objective must be robust_regression or sigmoid_squared", p->second);
    }
    cfg.objective_family = fam;
  }
  if (const auto* p = raw.find("l2")) {
    if (lower(p->first) != "auto") {
      const double l2 = to_real(p->first, "l2", p->second);
      if (l2 < 0) throw ParseError("l2 must be nonnegative", p->second);
      cfg.l2 = l2;
    }
  }
  if (cfg.objective_family == "robust_regression" && cfg.l2) {
    throw InvalidArgument("l2 applies to sigmoid_squared only");
  }

  if (const auto* p = raw.find("algorithm")) {
    cfg.algorithm = lower(p->first);
    if (!is_sequential(cfg.algorithm) && !is_distributed(cfg.algorithm)) {
      throw ParseError("unknown algorithm " + cfg.algorithm, p->second);
    }
  }
  if (const auto* p = raw.find("preset")) {
    static const char* const kPresets[] = {"cor1", "cor2", "cor3", "cor1d", "cor2d", "cor3d",
                                           "custom"};
    cfg.preset = lower(p->first);
    if (std::none_of(std::begin(kPresets), std::end(kPresets),
                     [&](const char* q) { return cfg.preset == q; })) {
      throw ParseError("unknown preset " + cfg.preset, p->second);
    }
  }

  // Preset names are tied to an algorithm family; everything else runs
  // preset-free.
  if (!cfg.preset.empty() && cfg.preset != "custom") {
    const bool dist_preset = cfg.preset.back() == 'd';
    if (cfg.algorithm == "zerosarah" && dist_preset) {
      throw InvalidArgument("preset " + cfg.preset + " is distributed; use d-zerosarah");
    }
    if (cfg.algorithm == "d-zerosarah" && !dist_preset) {
      throw InvalidArgument("preset " + cfg.preset + " is sequential; use zerosarah");
    }
    if (cfg.algorithm != "zerosarah" && cfg.algorithm != "d-zerosarah") {
      throw InvalidArgument("preset " + cfg.preset + " does not apply to " + cfg.algorithm);
    }
  }
  if (cfg.preset == "custom" && cfg.algorithm != "zerosarah" && cfg.algorithm != "d-zerosarah") {
    throw InvalidArgument("preset custom does not apply to " + cfg.algorithm);
  }

  if (const auto* p = raw.find("eta")) {
    const double eta = to_real(p->first, "eta", p->second);
    if (eta <= 0) throw ParseError("eta must be positive", p->second);
    cfg.extras.stepsize_override = eta;
  }
  if (const auto* p = raw.find("eta_scale")) {
    const double scale = to_real(p->first, "eta_scale", p->second);
    if (scale <= 0) throw ParseError("eta_scale must be positive", p->second);
    cfg.extras.stepsize_scale = scale;
  }
  if (const auto* p = raw.find("epsilon")) {
    const double eps = to_real(p->first, "epsilon", p->second);
    if (eps <= 0) throw ParseError("epsilon must be positive", p->second);
    cfg.extras.epsilon = eps;
  }
  if (const auto* p = raw.find("g0")) {
    const double g0 = to_real(p->first, "g0", p->second);
    if (g0 < 0) throw ParseError("g0 must be nonnegative", p->second);
    cfg.extras.g0 = g0;
  }
  if (const auto* p = raw.find("smoothness")) {
    const double sm = to_real(p->first, "smoothness", p->second);
    if (sm <= 0) throw ParseError("smoothness must be positive", p->second);
    cfg.smoothness = sm;
  }

  const auto opt_count = [&](const char* key, std::optional<int>* out) {
    if (const auto* p = raw.find(key)) {
      *out = static_cast<int>(positive_int(p->first, key, p->second));
    }
  };
  opt_count("batch0", &cfg.batch0);
  opt_count("batch", &cfg.batch);
  opt_count("clients0", &cfg.clients0);
  opt_count("clients", &cfg.clients);
  if (const auto* p = raw.find("epoch_length")) {
    const long long l = to_int(p->first, "epoch_length", p->second);
    if (l < 0) throw ParseError("epoch_length must be nonnegative", p->second);
    cfg.epoch_length = static_cast<int>(l);
  }
  if (const auto* p = raw.find("lambda")) {
    const double lam = to_real(p->first, "lambda", p->second);
    if (lam <= 0 || lam > 1) throw ParseError("lambda must lie in (0, 1]", p->second);
    cfg.lambda = lam;
  }

  if (const auto* p = raw.find("n_clients")) {
    cfg.n_clients = static_cast<int>(positive_int(p->first, "n_clients", p->second));
  }
  if (is_distributed(cfg.algorithm) && cfg.n_clients < 1) {
    throw InvalidArgument(cfg.algorithm + " needs n_clients");
  }
  if (is_sequential(cfg.algorithm) && cfg.n_clients != 0) {
    throw InvalidArgument("n_clients applies to distributed algorithms only");
  }

  if (const auto* p = raw.find("max_iters")) {
    cfg.max_iters = static_cast<long>(positive_int(p->first, "max_iters", p->second));
  }
  if (const auto* p = raw.find("max_paper_count")) {
    cfg.max_paper_count = positive_int(p->first, "max_paper_count", p->second);
  }
  if (cfg.max_iters == 0 && cfg.max_paper_count == 0) cfg.max_iters = 1000;

  if (const auto* p = raw.find("cadence")) {
    cfg.cadence = static_cast<long>(positive_int(p->first, "cadence", p->second));
  }
  if (const auto* p = raw.find("seed")) cfg.seed = to_seed(p->first, "seed", p->second);

  if (const auto* p = raw.find("x0")) {
    cfg.x0 = lower(p->first);
    if (cfg.x0 != "zero" && cfg.x0 != "ones" && cfg.x0 != "gaussian") {
      throw ParseError("x0 must be zero, ones or gaussian", p->second);
    }
  }
  if (const auto* p = raw.find("x0_scale")) {
    cfg.x0_scale = to_real(p->first, "x0_scale", p->second);
  }

  if (const auto* p = raw.find("report_bound")) {
    cfg.report_bound = to_bool(p->first, "report_bound", p->second);
  }
  if (cfg.report_bound && cfg.algorithm != "zerosarah" && cfg.algorithm != "d-zerosarah") {
    throw InvalidArgument("report_bound applies to zerosarah and d-zerosarah");
  }

  return cfg;
}

// ---- problem construction ----

std::shared_ptr<const Dataset> resolve_dataset(const ExperimentConfig& cfg) {
  const int sources = (!cfg.dataset.empty() ? 1 : 0) + (!cfg.dataset_file.empty() ? 1 : 0) +
                      (cfg.synthetic ? 1 : 0);
  if (sources != 1) {
    throw InvalidArgument("config must name exactly one of dataset, dataset_file, synthetic");
  }
  if (!cfg.dataset.empty()) {
    return std::make_shared<Dataset>(load_named_dataset(cfg.dataset));
  }
  if (!cfg.dataset_file.empty()) {
    std::ifstream in(cfg.dataset_file);
    if (!in) throw DataNotFound("cannot open " + cfg.dataset_file);
    return std::make_shared<Dataset>(parse_libsvm(in));
  }
  return std::make_shared<Dataset>(synthesize_dataset(*cfg.synthetic));
}

std::string resolve_family(const ExperimentConfig& cfg, const Dataset& ds) {
  if (!cfg.objective_family.empty()) return cfg.objective_family;
  return ds.kind() == DatasetKind::kBinaryLabels ? "sigmoid_squared" : "robust_regression";
}

struct BuiltObjective {
  std::shared_ptr<const Objective> objective;
  double l2_used = 0.0;
};

BuiltObjective build_objective(const ExperimentConfig& cfg, std::shared_ptr<const Dataset> ds,
                               const std::string& family, std::optional<double> l2_auto) {
  if (family == "robust_regression") {
    if (cfg.l2) throw InvalidArgument("l2 applies to sigmoid_squared only");
    return {std::make_shared<RobustRegressionLoss>(std::move(ds)), 0.0};
  }
  if (family == "sigmoid_squared") {
    const double l2 = cfg.l2 ? *cfg.l2 : (l2_auto ? *l2_auto : default_sigmoid_l2(*ds));
    return {std::make_shared<SigmoidSquaredLoss>(std::move(ds), l2), l2};
  }
  throw InvalidArgument("unknown objective family " + family);
}

Point make_x0(const ExperimentConfig& cfg, int dimension) {
  Point x;
  if (cfg.x0 == "zero") {
    x = Point::Zero(dimension);
  } else if (cfg.x0 == "ones") {
    x = Point::Ones(dimension);
  } else if (cfg.x0 == "gaussian") {
    Rng rng = substream(cfg.seed, kInitLane, 0);
    x = Point(dimension);
    for (int i = 0; i < dimension; ++i) x[i] = rng.normal();
  } else {
    throw InvalidArgument("x0 must be zero, ones or gaussian");
  }
  if (cfg.x0_scale != 1.0) x *= cfg.x0_scale;
  return x;
}

double injected_smoothness(const ExperimentConfig& cfg, const Objective& obj) {
  if (cfg.smoothness) return *cfg.smoothness;
  if (const auto* quad = dynamic_cast<const QuadraticComponents*>(&obj)) {
    return quad->exact_smoothness();
  }
  throw InvalidArgument("set smoothness in the config for objectives without known curvature");
}

void reject_custom_scale(const ExperimentConfig& cfg) {
  if (cfg.extras.stepsize_scale != 1.0) {
    throw InvalidArgument("eta_scale applies to preset stepsizes; give eta directly with custom");
  }
}

ParamSchedule make_sequential_schedule(const ExperimentConfig& cfg, const Objective& obj,
                                       double smoothness, const Point& x0) {
  const int n = obj.num_components();
  const std::string preset = cfg.preset.empty() ? "cor2" : cfg.preset;
  if (preset == "custom") {
    reject_custom_scale(cfg);
    if (!cfg.extras.stepsize_override || !cfg.batch || !cfg.lambda) {
      throw InvalidArgument("custom preset needs eta, batch and lambda");
    }
    const int b = *cfg.batch;
    return ParamSchedule::custom(n, *cfg.extras.stepsize_override, cfg.batch0.value_or(b), b,
                                 *cfg.lambda);
  }
  if (cfg.batch || cfg.batch0 || cfg.lambda) {
    throw InvalidArgument("batch0/batch/lambda need preset = custom");
  }
  ScheduleExtras extras = cfg.extras;
  if (preset == "cor3" && !extras.g0) {
    extras.g0 = initial_gradient_second_moment(obj, x0);
  }
  return schedule_preset(preset, n, smoothness, extras);
}

// Average of ||grad f_ij(x0)||^2 over every sample of every client. Client
// shards are equal-sized, so the mean of the client means is the global mean.
double dist_second_moment(const std::vector<std::shared_ptr<const Objective>>& clients,
                          const Point& x0) {
  double acc = 0.0;
  for (const auto& c : clients) acc += initial_gradient_second_moment(*c, x0);
  return acc / static_cast<double>(clients.size());
}

DistSchedule make_dist_schedule(const ExperimentConfig& cfg,
                                const std::vector<std::shared_ptr<const Objective>>& clients,
                                double smoothness, const Point& x0, double* g0_out) {
  const int n = static_cast<int>(clients.size());
  const int m = clients.front()->num_components();
  const std::string preset = cfg.preset.empty() ? "cor2d" : cfg.preset;
  if (preset == "custom") {
    reject_custom_scale(cfg);
    if (!cfg.extras.stepsize_override || !cfg.clients || !cfg.batch || !cfg.lambda) {
      throw InvalidArgument("custom preset needs eta, clients, batch and lambda");
    }
    const int s = *cfg.clients;
    const int b = *cfg.batch;
    return DistSchedule::custom(n, m, *cfg.extras.stepsize_override, cfg.clients0.value_or(s),
                                cfg.batch0.value_or(b), s, b, *cfg.lambda);
  }
  if (cfg.batch || cfg.batch0 || cfg.clients || cfg.clients0 || cfg.lambda) {
    throw InvalidArgument("clients0/clients/batch0/batch/lambda need preset = custom");
  }
  ScheduleExtras extras = cfg.extras;
  if (preset == "cor3d" && !extras.g0) {
    extras.g0 = dist_second_moment(clients, x0);
    if (g0_out) *g0_out = *extras.g0;
  }
  return dist_schedule_preset(preset, n, m, smoothness, extras);
}

// Weighted reservoir draw of the output iterate: seeing x^k with weight
// eta_k, replace the held candidate with probability eta_k / sum_{t<=k} eta_t.
// The candidate after K steps is distributed exactly as the eta-weighted
// output rule, without storing the iterate history.
struct OutputReservoir {
  std::uint64_t seed = 0;
  Point candidate;
  long index = -1;
  double eta_sum = 0.0;

  void consider(const Point& x, double eta, long k) {
    eta_sum += eta;
    Rng rng = substream(seed, kOutputSelectLane, static_cast<std::uint64_t>(k));
    if (rng.uniform01() * eta_sum < eta) {
      candidate = x;
      index = k;
    }
  }
};

struct BudgetState {
  long max_iters = 0;
  long long max_paper = 0;

  BudgetState(long iters, long long paper) : max_iters(iters), max_paper(paper) {
    if (max_iters <= 0 && max_paper <= 0) {
      throw InvalidArgument("set max_iters or max_paper_count");
    }
  }

  bool exhausted(long k, const GradCounter& counters) const {
    if (max_iters > 0 && k >= max_iters) return true;
    if (max_paper > 0 && counters.paper_count >= max_paper) return true;
    return false;
  }
};

void fill_bound_report(ExperimentResult* res, const OutputReservoir& reservoir, double delta0,
                       bool delta0_exact, double g0, const BoundBreakdown& breakdown,
                       const Point& output_grad) {
  BoundReport report;
  report.breakdown = breakdown;
  report.iterations = res->iterations;
  report.delta0 = delta0;
  report.delta0_exact = delta0_exact;
  report.g0 = g0;
  report.output_grad_sq = output_grad.squaredNorm();
  report.output_index = reservoir.index;
  res->bound = report;
}

ExperimentResult run_sequential(const ExperimentConfig& cfg, std::shared_ptr<const Objective> obj,
                                double smoothness, std::optional<double> exact_min) {
  if (!is_sequential(cfg.algorithm)) {
    throw InvalidArgument("run_experiment handles zerosarah, sarah and gd; got " + cfg.algorithm);
  }
  if (cfg.n_clients != 0) throw InvalidArgument("n_clients applies to distributed algorithms only");
  if (cfg.clients || cfg.clients0) {
    throw InvalidArgument("clients/clients0 apply to distributed algorithms only");
  }
  if (cfg.report_bound && cfg.algorithm != "zerosarah") {
    throw InvalidArgument("report_bound applies to zerosarah and d-zerosarah");
  }

  const int n = obj->num_components();
  const Point x0 = make_x0(cfg, obj->dimension());
  const long cadence = cfg.cadence > 0 ? cfg.cadence : ceil_sqrt(n);

  std::optional<ZeroSarah> zerosarah;
  std::optional<Sarah> sarah;
  std::optional<Gd> gd;
  std::function<StepReport()> step;
  std::function<const Point&()> iterate;
  std::function<const GradCounter&()> counters;
  std::optional<ParamSchedule> sched;

  if (cfg.algorithm == "zerosarah") {
    if (cfg.epoch_length) throw InvalidArgument("epoch_length applies to the sarah family");
    sched = make_sequential_schedule(cfg, *obj, smoothness, x0);
    zerosarah.emplace(obj, *sched, x0, cfg.seed);
    step = [&] { return zerosarah->step(); };
    iterate = [&]() -> const Point& { return zerosarah->iterate(); };
    counters = [&]() -> const GradCounter& { return zerosarah->counters(); };
  } else if (cfg.algorithm == "sarah") {
    if (!cfg.preset.empty()) throw InvalidArgument("preset does not apply to sarah");
    if (cfg.lambda || cfg.batch0) throw InvalidArgument("lambda/batch0 do not apply to sarah");
    SarahParams params = sarah_defaults(n, smoothness);
    if (cfg.epoch_length) params.epoch_length = *cfg.epoch_length;
    if (cfg.batch) params.batch = *cfg.batch;
    if (cfg.extras.stepsize_override) {
      params.eta = *cfg.extras.stepsize_override;
    } else {
      params.eta *= cfg.extras.stepsize_scale;
    }
    sarah.emplace(obj, params, x0, cfg.seed);
    step = [&] { return sarah->step(); };
    iterate = [&]() -> const Point& { return sarah->iterate(); };
    counters = [&]() -> const GradCounter& { return sarah->counters(); };
  } else {
    if (!cfg.preset.empty()) throw InvalidArgument("preset does not apply to gd");
    if (cfg.lambda || cfg.batch || cfg.batch0 || cfg.epoch_length) {
      throw InvalidArgument("schedule knobs do not apply to gd");
    }
    double eta = 1.0 / ((1.0 + std::sqrt(8.0)) * smoothness);
    if (cfg.extras.stepsize_override) {
      eta = *cfg.extras.stepsize_override;
    } else {
      eta *= cfg.extras.stepsize_scale;
    }
    gd.emplace(obj, eta, x0);
    step = [&] { return gd->step(); };
    iterate = [&]() -> const Point& { return gd->iterate(); };
    counters = [&]() -> const GradCounter& { return gd->counters(); };
  }

  const bool bound_active = cfg.report_bound;
  if (bound_active && !sched->theoretical()) {
    throw InvalidArgument("report_bound needs the theoretical preset stepsize");
  }
  double g0 = 0.0;
  if (bound_active) {
    g0 = cfg.extras.g0 ? *cfg.extras.g0 : initial_gradient_second_moment(*obj, x0);
  }
  OutputReservoir reservoir{cfg.seed, Point(), -1, 0.0};

  Trace trace;
  trace.label = cfg.label.empty() ? cfg.algorithm : cfg.label;

  double best_objective = std::numeric_limits<double>::infinity();
  long long seen_full_events = 0;
  const auto record = [&](long iter) {
    TraceRecord rec;
    rec.iter = iter;
    rec.paper_count = counters().paper_count;
    rec.actual_count = counters().actual_count;
    const Point& x = iterate();
    rec.grad_norm = obj->full_gradient(x).norm();
    rec.objective = obj->value(x);
    // A saturating loss can keep the iterate and its gradient finite while
    // the objective blows up, so divergence has to be caught here too, not
    // only inside the optimizer step. The poisoned record is dropped.
    if (!std::isfinite(rec.grad_norm) || !std::isfinite(rec.objective)) {
      trace.diverged = true;
      trace.diverged_at = iter;
      return;
    }
    rec.full_batch_event = counters().full_batch_events > seen_full_events;
    seen_full_events = counters().full_batch_events;
    best_objective = std::min(best_objective, rec.objective);
    trace.records.push_back(std::move(rec));
  };

  record(0);
  const double f0 = trace.diverged ? std::numeric_limits<double>::infinity()
                                   : trace.records.front().objective;

  const BudgetState budget{cfg.max_iters, cfg.max_paper_count};
  long k = 0;
  while (!trace.diverged && !budget.exhausted(k, counters())) {
    if (bound_active) reservoir.consider(iterate(), sched->eta(k), k);
    try {
      step();
    } catch (const DivergenceError& err) {
      trace.diverged = true;
      trace.diverged_at = err.iteration();
      break;
    }
    ++k;
    if (k % cadence == 0) record(k);
  }
  if (!trace.diverged && trace.records.back().iter != k) record(k);

  ExperimentResult res;
  res.counters = counters();
  res.final_iterate = iterate();
  res.iterations = k;
  if (bound_active && !trace.diverged && k >= 1) {
    const double delta0 = exact_min ? f0 - *exact_min : f0 - best_objective;
    const BoundBreakdown breakdown = theoretical_bound_breakdown(delta0, g0, *sched, k);
    fill_bound_report(&res, reservoir, delta0, exact_min.has_value(), g0,
                      breakdown, obj->full_gradient(reservoir.candidate));
  }
  res.trace = std::move(trace);
  return res;
}

ExperimentResult run_distributed(const ExperimentConfig& cfg,
                                 std::vector<std::shared_ptr<const Objective>> clients,
                                 double smoothness, std::optional<double> exact_min) {
  if (!is_distributed(cfg.algorithm)) {
    throw InvalidArgument("run_distributed_experiment handles d-zerosarah and d-sarah; got " +
                          cfg.algorithm);
  }
  if (clients.empty()) throw InvalidArgument("distributed run needs at least one client");
  if (cfg.n_clients != 0 && cfg.n_clients != static_cast<int>(clients.size())) {
    throw InvalidArgument("n_clients disagrees with the client list");
  }
  if (cfg.report_bound && cfg.algorithm != "d-zerosarah") {
    throw InvalidArgument("report_bound applies to zerosarah and d-zerosarah");
  }

  const Point x0 = make_x0(cfg, clients.front()->dimension());
  const long cadence = cfg.cadence > 0 ? cfg.cadence : 1;

  std::optional<DZeroSarah> dzerosarah;
  std::optional<DSarah> dsarah;
  std::function<RoundEvent()> round;
  std::function<const Point&()> iterate;
  std::function<const GradCounter&()> counters;
  std::function<Point(const Point&)> full_gradient;
  std::function<double(const Point&)> value;
  std::optional<DistSchedule> sched;
  double g0 = 0.0;
  bool g0_ready = false;

  if (cfg.algorithm == "d-zerosarah") {
    if (cfg.epoch_length) throw InvalidArgument("epoch_length applies to the sarah family");
    double g0_from_preset = -1.0;
    sched = make_dist_schedule(cfg, clients, smoothness, x0, &g0_from_preset);
    if (g0_from_preset >= 0.0) {
      g0 = g0_from_preset;
      g0_ready = true;
    }
    dzerosarah.emplace(std::move(clients), *sched, x0, cfg.seed);
    round = [&] { return dzerosarah->round(); };
    iterate = [&]() -> const Point& { return dzerosarah->iterate(); };
    counters = [&]() -> const GradCounter& { return dzerosarah->counters(); };
    full_gradient = [&](const Point& x) { return dzerosarah->full_gradient(x); };
    value = [&](const Point& x) { return dzerosarah->value(x); };
  } else {
    if (!cfg.preset.empty()) throw InvalidArgument("preset does not apply to d-sarah");
    if (cfg.lambda || cfg.batch0 || cfg.clients0) {
      throw InvalidArgument("lambda/batch0/clients0 do not apply to d-sarah");
    }
    const int n = static_cast<int>(clients.size());
    const int m = clients.front()->num_components();
    DSarahParams params = dsarah_defaults(n, m, smoothness);
    if (cfg.epoch_length) params.epoch_length = *cfg.epoch_length;
    if (cfg.clients) params.clients = *cfg.clients;
    if (cfg.batch) params.batch = *cfg.batch;
    if (cfg.extras.stepsize_override) {
      params.eta = *cfg.extras.stepsize_override;
    } else {
      params.eta *= cfg.extras.stepsize_scale;
    }
    dsarah.emplace(std::move(clients), params, x0, cfg.seed);
    round = [&] { return dsarah->round(); };
    iterate = [&]() -> const Point& { return dsarah->iterate(); };
    counters = [&]() -> const GradCounter& { return dsarah->counters(); };
    full_gradient = [&](const Point& x) { return dsarah->full_gradient(x); };
    value = [&](const Point& x) { return dsarah->value(x); };
  }

  const bool bound_active = cfg.report_bound;
  if (bound_active && !sched->theoretical()) {
    throw InvalidArgument("report_bound needs the theoretical preset stepsize");
  }
  if (bound_active && !g0_ready) {
    if (cfg.extras.g0) {
      g0 = *cfg.extras.g0;
    } else if (dzerosarah) {
      double acc = 0.0;
      for (int i = 0; i < dzerosarah->num_clients(); ++i) {
        acc += initial_gradient_second_moment(*dzerosarah->client(i).objective, x0);
      }
      g0 = acc / dzerosarah->num_clients();
    }
  }
  OutputReservoir reservoir{cfg.seed, Point(), -1, 0.0};

  Trace trace;
  trace.distributed = true;
  trace.label = cfg.label.empty() ? cfg.algorithm : cfg.label;

  double best_objective = std::numeric_limits<double>::infinity();
  long long seen_full_events = 0;
  std::vector<int> latest_clients;
  const auto record = [&](long iter) {
    TraceRecord rec;
    rec.iter = iter;
    rec.paper_count = counters().paper_count;
    rec.actual_count = counters().actual_count;
    const Point& x = iterate();
    rec.grad_norm = full_gradient(x).norm();
    rec.objective = value(x);
    // Same record-level divergence net as the sequential runner.
    if (!std::isfinite(rec.grad_norm) || !std::isfinite(rec.objective)) {
      trace.diverged = true;
      trace.diverged_at = iter;
      return;
    }
    rec.full_batch_event = counters().full_batch_events > seen_full_events;
    seen_full_events = counters().full_batch_events;
    rec.sampled_clients = latest_clients;
    best_objective = std::min(best_objective, rec.objective);
    trace.records.push_back(std::move(rec));
  };

  record(0);
  const double f0 = trace.diverged ? std::numeric_limits<double>::infinity()
                                   : trace.records.front().objective;

  const BudgetState budget{cfg.max_iters, cfg.max_paper_count};
  long k = 0;
  while (!trace.diverged && !budget.exhausted(k, counters())) {
    if (bound_active) reservoir.consider(iterate(), sched->eta(k), k);
    try {
      const RoundEvent ev = round();
      latest_clients = ev.sampled_clients;
    } catch (const DivergenceError& err) {
      trace.diverged = true;
      trace.diverged_at = err.iteration();
      break;
    }
    ++k;
    if (k % cadence == 0) record(k);
  }
  if (!trace.diverged && trace.records.back().iter != k) record(k);

  ExperimentResult res;
  res.counters = counters();
  res.final_iterate = iterate();
  res.iterations = k;
  if (bound_active && !trace.diverged && k >= 1) {
    const double delta0 = exact_min ? f0 - *exact_min : f0 - best_objective;
    const BoundBreakdown breakdown = theoretical_bound_dist_breakdown(delta0, g0, *sched, k);
    fill_bound_report(&res, reservoir, delta0, exact_min.has_value(), g0,
                      breakdown, full_gradient(reservoir.candidate));
  }
  res.trace = std::move(trace);
  return res;
}

}  // namespace

ExperimentConfig parse_config(std::istream& in) { return interpret(read_pairs(in)); }

ExperimentConfig parse_config_text(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataNotFound("cannot open config " + path);
  return parse_config(in);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  const auto ds = resolve_dataset(cfg);
  const std::string family = resolve_family(cfg, *ds);
  const BuiltObjective built = build_objective(cfg, ds, family, std::nullopt);
  const double smoothness =
      cfg.smoothness ? *cfg.smoothness : estimate_smoothness(*ds, built.l2_used);
  return run_sequential(cfg, built.objective, smoothness, std::nullopt);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, std::shared_ptr<const Objective> obj,
                                std::optional<double> exact_min) {
  if (!obj) throw InvalidArgument("run_experiment: null objective");
  const double smoothness = injected_smoothness(cfg, *obj);
  return run_sequential(cfg, std::move(obj), smoothness, exact_min);
}

ExperimentResult run_distributed_experiment(const ExperimentConfig& cfg) {
  if (cfg.n_clients < 1) throw InvalidArgument(cfg.algorithm + " needs n_clients");
  const auto ds = resolve_dataset(cfg);
  const std::string family = resolve_family(cfg, *ds);
  // The l2 strength and the curvature estimate come from the whole dataset
  // before sharding, so every client optimizes the same objective family with
  // identical constants.
  std::optional<double> l2_auto;
  if (family == "sigmoid_squared") l2_auto = default_sigmoid_l2(*ds);
  double l2_used = 0.0;
  std::vector<std::shared_ptr<const Objective>> clients;
  for (Dataset& shard : partition_clients(*ds, cfg.n_clients)) {
    BuiltObjective built =
        build_objective(cfg, std::make_shared<Dataset>(std::move(shard)), family, l2_auto);
    l2_used = built.l2_used;
    clients.push_back(std::move(built.objective));
  }
  const double smoothness = cfg.smoothness ? *cfg.smoothness : estimate_smoothness(*ds, l2_used);
  return run_distributed(cfg, std::move(clients), smoothness, std::nullopt);
}

ExperimentResult run_distributed_experiment(const ExperimentConfig& cfg,
                                            std::vector<std::shared_ptr<const Objective>> clients,
                                            std::optional<double> exact_min) {
  if (clients.empty()) throw InvalidArgument("distributed run needs at least one client");
  double smoothness = 0.0;
  if (cfg.smoothness) {
    smoothness = *cfg.smoothness;
  } else {
    for (const auto& c : clients) {
      if (!c) throw InvalidArgument("run_distributed_experiment: null client objective");
      smoothness = std::max(smoothness, injected_smoothness(cfg, *c));
    }
  }
  return run_distributed(cfg, std::move(clients), smoothness, exact_min);
}

}  // namespace vropt
