#pragma once

#include <cstdint>
#include <random>

namespace accel {

// Deterministic RNG. mt19937_64 output is pinned by the standard and the
// transformations below avoid std::*_distribution (whose streams are
// implementation-defined), so identical seeds give identical bytes
// everywhere.
class rng {
public:
  explicit rng(std::uint64_t seed) : eng_(seed) {}

  // in [0, 1)
  double uniform01() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  // standard normal via Box-Muller (cosine branch only)
  double gaussian();

  // log-uniform over [lo, hi], lo > 0
  double log_uniform(double lo, double hi);

private:
  std::mt19937_64 eng_;
};

// Counter-based fan-out: one root seed, independent streams per consumer.
std::uint64_t split_seed(std::uint64_t root, std::uint64_t stream);

} // namespace accel
