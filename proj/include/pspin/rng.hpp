#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace pspin {

// Counter-based stream built on the splitmix64 finalizer.  Every draw is a
// pure function of (seed, stream, counter), so work can be partitioned across
// threads in any order without changing results.
class CounterRng {
 public:
  CounterRng(uint64_t seed, uint64_t stream)
      : key_(mix(seed ^ 0x5851F42D4C957F2DULL) ^ mix(stream ^ 0x14057B7EF767814FULL)) {}

  uint64_t bits(uint64_t counter) const {
    return mix(key_ + counter * 0x9E3779B97F4A7C15ULL);
  }

  // Uniform in (0,1); never returns exactly 0.
  double uniform(uint64_t counter) const {
    return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard Gaussian via Box-Muller; consumes counters 2k and 2k+1.
  double gaussian(uint64_t index) const {
    double u1 = uniform(2 * index);
    double u2 = uniform(2 * index + 1);
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  static uint64_t mix(uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  uint64_t key_;
};

}  // namespace pspin
