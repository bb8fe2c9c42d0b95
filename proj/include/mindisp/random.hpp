#pragma once

#include <cstdint>
#include <random>

namespace mindisp {

// std::uniform_real_distribution is implementation-defined; this mapping is not, so
// seeded layouts and warm starts are identical across standard libraries.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

}  // namespace mindisp
