#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "vropt/errors.hpp"

namespace vropt {

// Deterministic random source. mt19937_64 output is pinned by the standard,
// and the helpers below avoid std::*_distribution so a (seed, call sequence)
// pair yields the same numbers on any platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }

  // Unbiased integer in [0, bound) via rejection.
  std::uint64_t uniform_below(std::uint64_t bound) {
    if (bound == 0) throw InvalidArgument("uniform_below: bound must be positive");
    if (bound == 1) return 0;
    const std::uint64_t threshold = (-bound) % bound;
    for (;;) {
      const std::uint64_t r = gen_();
      if (r >= threshold) return r % bound;
    }
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Standard normal, Box-Muller with a cached spare.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}
}  // namespace detail

// Independent stream for (lane, index) under one master seed. Optimizers use
// lane = client id and index = iteration, so a one-client federation draws the
// same minibatches as the sequential algorithm with the same seed.
inline Rng substream(std::uint64_t master, std::uint64_t lane, std::uint64_t index) {
  std::uint64_t s = detail::splitmix64(master ^ 0x8BADF00DDEADBEEFULL);
  s = detail::splitmix64(s ^ detail::splitmix64(lane));
  s = detail::splitmix64(s ^ detail::splitmix64(index));
  return Rng(s);
}

// Reserved lane ids. Client ids are always < n, so these cannot collide.
inline constexpr std::uint64_t kClientSubsetLane = 0xFFFFFFFF00000001ULL;
inline constexpr std::uint64_t kOutputSelectLane = 0xFFFFFFFF00000002ULL;
inline constexpr std::uint64_t kInitLane = 0xFFFFFFFF00000003ULL;

// Uniform random b-subset of {0, ..., n-1}, sorted ascending. Robert Floyd's
// algorithm: O(b) draws, no O(n) scratch.
std::vector<int> sample_without_replacement(int n, int b, Rng& rng);

}  // namespace vropt
