#pragma once

// Counter-based random numbers: every draw is a pure function of
// (seed, stream, counter), so results do not depend on evaluation order.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace kwind {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t seed) : key_(mix64(seed ^ 0x6a09e667f3bcc909ULL)) {}

  constexpr std::uint64_t bits(std::uint64_t stream, std::uint64_t counter) const {
    return mix64(mix64(key_ ^ mix64(stream)) + counter * 0x9e3779b97f4a7c15ULL);
  }

  /// Uniform in (0, 1), never exactly 0.
  double uniform(std::uint64_t stream, std::uint64_t counter) const {
    return (static_cast<double>(bits(stream, counter) >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal from Box-Muller on counters 2k and 2k+1.
  double normal(std::uint64_t stream, std::uint64_t k = 0) const {
    const double u1 = uniform(stream, 2 * k);
    const double u2 = uniform(stream, 2 * k + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t key_;
};

}  // namespace kwind
