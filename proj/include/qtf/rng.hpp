#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace qtf::rng {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

/// Counter-split stream seed for (master seed, purpose, index). Streams for
/// distinct purposes never share draws, so e.g. enabling ghost hits does not
/// perturb measurement-smearing sequences.
inline constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t purpose,
                                      std::uint64_t index = 0) {
  std::uint64_t h = mix64(seed + kGolden);
  h = mix64(h ^ (purpose * 0xd1342543de82ef95ULL + 1));
  h = mix64(h ^ (index * kGolden + 2));
  return h;
}

/// SplitMix64 sequence. Self-contained so draws are bit-reproducible across
/// platforms and standard-library versions.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += kGolden;
    return mix64(state_);
  }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform in (0, 1]; safe as a log() argument.
  double uniform01_open() {
    return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Standard normal via Box-Muller (two draws per call, no cached state).
  double normal() {
    const double u = uniform01_open();
    const double v = uniform01();
    return std::sqrt(-2.0 * std::log(u)) *
           std::cos(2.0 * std::numbers::pi * v);
  }

  /// Unbiased integer in [0, n) by rejection.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return x % n;
  }

 private:
  std::uint64_t state_;
};

}  // namespace qtf::rng
