#pragma once

// Portable draws on top of std::mt19937_64. The standard distributions are
// implementation-defined, so they are avoided wherever output must be
// reproducible across toolchains.

#include <cstdint>
#include <random>
#include <vector>

namespace driftdecomp::detail {

inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

/// Fisher-Yates with the index drawn from the top 53 bits.
template <class T>
void shuffle(std::vector<T>& items, std::mt19937_64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
    if (j >= i) j = i - 1;
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace driftdecomp::detail
