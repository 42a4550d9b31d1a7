#include "accel/rng.hpp"

#include <cmath>
#include <numbers>

#include "accel/errors.hpp"

namespace accel {

double rng::gaussian() {
  // u1 in (0, 1] so the log stays finite
  double u1 = static_cast<double>((eng_() >> 11) + 1) * 0x1.0p-53;
  double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double rng::log_uniform(double lo, double hi) {
  if (!(lo > 0.0) || hi < lo) throw input_error("log_uniform: need 0 < lo <= hi");
  double u = uniform01();
  return std::exp(std::log(lo) + u * (std::log(hi) - std::log(lo)));
}

std::uint64_t split_seed(std::uint64_t root, std::uint64_t stream) {
  // splitmix64 finalizer over root + stream * golden gamma
  std::uint64_t z = root + (stream + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

} // namespace accel
