#include "vropt/rng.hpp"

#include <algorithm>

namespace vropt {

std::vector<int> sample_without_replacement(int n, int b, Rng& rng) {
  if (n < 1) throw InvalidArgument("sample_without_replacement: n must be >= 1");
  if (b < 1 || b > n)
    throw InvalidArgument("sample_without_replacement: need 1 <= b <= n, got b=" +
                          std::to_string(b) + " n=" + std::to_string(n));
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(b));
  // Floyd: visiting t = n-b .. n-1, insert a uniform draw from [0, t]; on a
  // repeat insert t itself. Every b-subset comes out equally likely.
  for (int t = n - b; t < n; ++t) {
    const int r = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(t) + 1));
    if (std::find(out.begin(), out.end(), r) == out.end()) {
      out.push_back(r);
    } else {
      out.push_back(t);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace vropt
