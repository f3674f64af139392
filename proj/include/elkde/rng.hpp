#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace elkde {

// SplitMix64 finalizer; used to key independent streams off one master seed.
inline std::uint64_t splitmix64_mix(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seeded random stream.
///
/// Every consumer derives its own stream from the single master seed and a
/// small integer path (stream kind, ensemble size, method id, run index, ...)
/// via SplitMix64 mixing, so Monte Carlo tasks are reproducible and
/// independent of scheduling. Variate mappings (53-bit uniform, Box-Muller
/// normal) are implemented here rather than via std::*_distribution so that
/// sequences are pinned by this codebase.
class RngStream {
 public:
  explicit RngStream(std::uint64_t master_seed,
                     std::initializer_list<std::uint64_t> path = {})
      : engine_(derive_key(master_seed, path)) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform draw in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Standard normal draw (Box-Muller, pair cached).
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double u1 = uniform01();               // [0, 1)
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log1p(-u1));  // log(1-u1), never log(0)
    const double t = 2.0 * M_PI * u2;
    cached_ = r * std::sin(t);
    have_cached_ = true;
    return r * std::cos(t);
  }

 private:
  static std::uint64_t derive_key(std::uint64_t master,
                                  std::initializer_list<std::uint64_t> path) {
    std::uint64_t key = splitmix64_mix(master);
    for (std::uint64_t p : path) {
      key = splitmix64_mix(key ^ splitmix64_mix(p));
    }
    return key;
  }

  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace elkde
