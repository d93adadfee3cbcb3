#pragma once
// Seeded draws on top of mt19937_64. The standard distributions are
// implementation-defined, so everything that feeds a reproducible output
// goes through these instead.

#include <cmath>
#include <cstdint>
#include <random>

#include "linkforge/error.hpp"

namespace linkforge {

// Uniform on [0, 1) from the top 53 bits.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  require(n > 0, "uniform_below(0)");
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do x = rng();
  while (x >= limit);
  return x % n;
}

inline bool bernoulli(std::mt19937_64& rng, double p) { return p > 0 && uniform01(rng) < p; }

// Knuth's product method; fine for the small means used here.
inline unsigned poisson(std::mt19937_64& rng, double mean) {
  if (mean <= 0) return 0;
  const double limit = std::exp(-mean);
  unsigned k = 0;
  double p = 1.0;
  while ((p *= 1.0 - uniform01(rng)) > limit) ++k;
  return k;
}

// Box-Muller, one variate per call.
inline double standard_normal(std::mt19937_64& rng) {
  const double u1 = 1.0 - uniform01(rng);  // (0, 1]
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

}  // namespace linkforge
