#include "vropt/synthetic.hpp"

#include <cmath>

#include "vropt/errors.hpp"
#include "vropt/rng.hpp"

namespace vropt {

Dataset synthesize_dataset(const SyntheticSpec& spec, Point* planted) {
  if (spec.size < 1) throw InvalidArgument("synthesize_dataset: size must be >= 1");
  if (spec.dimension < 1) throw InvalidArgument("synthesize_dataset: dimension must be >= 1");
  if (spec.noise_scale < 0.0) throw InvalidArgument("synthesize_dataset: negative noise scale");

  Rng rng = substream(spec.seed, 0, 0);
  const double scale = 1.0 / std::sqrt(static_cast<double>(spec.dimension));

  Point model(spec.dimension);
  for (int j = 0; j < spec.dimension; ++j) model[j] = rng.normal();

  std::vector<SparseRow> rows(static_cast<std::size_t>(spec.size));
  std::vector<double> targets(static_cast<std::size_t>(spec.size));
  for (int i = 0; i < spec.size; ++i) {
    SparseRow& row = rows[static_cast<std::size_t>(i)];
    row.entries.reserve(static_cast<std::size_t>(spec.dimension));
    for (int j = 0; j < spec.dimension; ++j)
      row.entries.emplace_back(j + 1, scale * rng.normal());
    const double clean = row.dot(model);
    const double noisy =
        spec.noise_scale == 0.0 ? clean : clean + spec.noise_scale * rng.normal();
    if (spec.task == SyntheticSpec::Task::kRegression)
      targets[static_cast<std::size_t>(i)] = noisy;
    else
      targets[static_cast<std::size_t>(i)] = noisy < 0.0 ? -1.0 : 1.0;
  }

  if (planted) *planted = std::move(model);
  const DatasetKind kind = spec.task == SyntheticSpec::Task::kRegression
                               ? DatasetKind::kRegressionTargets
                               : DatasetKind::kBinaryLabels;
  return Dataset(std::move(rows), std::move(targets), spec.dimension, kind);
}

}  // namespace vropt
