#include <benchmark/benchmark.h>

#include <memory>
#include <vector>

#include "vropt/dataset.hpp"
#include "vropt/federation.hpp"
#include "vropt/gradient_table.hpp"
#include "vropt/libsvm.hpp"
#include "vropt/objective.hpp"
#include "vropt/optimizers.hpp"
#include "vropt/rng.hpp"
#include "vropt/schedule.hpp"
#include "vropt/synthetic.hpp"

namespace {

std::shared_ptr<const vropt::Dataset> make_data(int n, int d, std::uint64_t seed = 42) {
  vropt::SyntheticSpec spec;
  spec.size = n;
  spec.dimension = d;
  spec.noise_scale = 0.1;
  spec.seed = seed;
  return std::make_shared<vropt::Dataset>(vropt::synthesize_dataset(spec));
}

void BM_ZeroSarahStep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int d = 32;
  const auto data = make_data(n, d);
  const auto obj = std::make_shared<vropt::RobustRegressionLoss>(data);
  const double L = vropt::estimate_smoothness(*data, 0.0);
  vropt::ZeroSarah opt(obj, vropt::schedule_preset("cor2", n, L), vropt::Point::Zero(d), 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(opt.step().direction.norm());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ZeroSarahStep)->Arg(256)->Arg(1024)->Arg(4096)->Arg(16384);

void BM_SarahInnerStep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int d = 32;
  const auto data = make_data(n, d);
  const auto obj = std::make_shared<vropt::RobustRegressionLoss>(data);
  const double L = vropt::estimate_smoothness(*data, 0.0);
  vropt::SarahParams params = vropt::sarah_defaults(n, L);
  params.epoch_length = 1 << 30;  // stay on the minibatch branch
  vropt::Sarah opt(obj, params, vropt::Point::Zero(d), 7);
  opt.step();  // the one full-gradient step
  for (auto _ : state) {
    benchmark::DoNotOptimize(opt.step().direction.norm());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SarahInnerStep)->Arg(1024)->Arg(16384);

void BM_FederatedRound(benchmark::State& state) {
  const int n_clients = static_cast<int>(state.range(0));
  const int d = 32;
  const auto data = make_data(n_clients * 64, d);
  std::vector<std::shared_ptr<const vropt::Objective>> clients;
  for (vropt::Dataset& shard : vropt::partition_clients(*data, n_clients)) {
    clients.push_back(
        std::make_shared<vropt::RobustRegressionLoss>(std::make_shared<vropt::Dataset>(shard)));
  }
  const double L = vropt::estimate_smoothness(*data, 0.0);
  vropt::DZeroSarah opt(std::move(clients), vropt::dist_schedule_preset("cor2d", n_clients, 64, L),
                        vropt::Point::Zero(d), 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(opt.round().direction.norm());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_FederatedRound)->Arg(16)->Arg(64)->Arg(256);

void BM_GradientTableReplace(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int d = 64;
  vropt::GradientTable table(n, d);
  const vropt::Point g = vropt::Point::Constant(d, 1.5);
  int i = 0;
  for (auto _ : state) {
    table.replace(i, g);
    i = (i + 1) % n;
  }
  benchmark::DoNotOptimize(table.mean().norm());
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_GradientTableReplace)->Arg(1024)->Arg(65536);

void BM_SampleWithoutReplacement(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int b = vropt::ceil_sqrt(n);
  vropt::Rng rng(99);
  for (auto _ : state) {
    benchmark::DoNotOptimize(vropt::sample_without_replacement(n, b, rng).size());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SampleWithoutReplacement)->Arg(1024)->Arg(1048576);

void BM_ParseLibsvm(benchmark::State& state) {
  const auto data = make_data(static_cast<int>(state.range(0)), 32);
  const std::string text = vropt::serialize_libsvm(*data);
  for (auto _ : state) {
    benchmark::DoNotOptimize(vropt::parse_libsvm_text(text).size());
  }
  state.SetBytesProcessed(static_cast<int64_t>(state.iterations()) *
                          static_cast<int64_t>(text.size()));
}
BENCHMARK(BM_ParseLibsvm)->Arg(1000)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
