#pragma once

#include <cstdint>

#include "vropt/dataset.hpp"

namespace vropt {

// Deterministic synthetic problem generator. Feature entries are i.i.d.
// N(0, 1/d), so row squared norms concentrate near 1; a planted model
// x* ~ N(0, I) produces the targets.
//   regression:      b_i = <a_i, x*> + noise_scale * e_i,  e_i ~ N(0,1)
//   classification:  b_i = sign(<a_i, x*> + noise_scale * e_i), sign(0) = +1
// The dot product uses the same accumulation order as the losses, so with
// noise_scale = 0 the planted regression residuals are exactly zero.
struct SyntheticSpec {
  enum class Task { kRegression, kClassification };
  Task task = Task::kRegression;
  int size = 0;
  int dimension = 0;
  double noise_scale = 0.0;
  std::uint64_t seed = 0;
};

// planted (if non-null) receives the generating model x*.
Dataset synthesize_dataset(const SyntheticSpec& spec, Point* planted = nullptr);

}  // namespace vropt
