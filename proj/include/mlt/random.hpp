#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>
#include <vector>

namespace mlt {

/// Independent random stream addressed by a key (seed, then any number of
/// 64-bit words). Streams with the same key produce the same values no matter
/// which thread or in which order they are created.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::initializer_list<std::uint64_t> key) {
    std::vector<std::uint32_t> words{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    for (auto k : key) {
      words.push_back(static_cast<std::uint32_t>(k));
      words.push_back(static_cast<std::uint32_t>(k >> 32));
    }
    std::seed_seq seq(words.begin(), words.end());
    engine_.seed(seq);
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on (0, 1], 53 random bits.
  double uniform_open0() { return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53; }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // rejection keeps it unbiased for any n
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do x = engine_();
    while (x >= limit);
    return x % n;
  }

  /// Standard normal pair by Box-Muller.
  std::pair<double, double> normal_pair() {
    const double r = std::sqrt(-2.0 * std::log(uniform_open0()));
    const double theta = 2.0 * std::numbers::pi * (static_cast<double>(engine_() >> 11) * 0x1.0p-53);
    return {r * std::cos(theta), r * std::sin(theta)};
  }

  /// Circular complex Gaussian with E|z|^2 = variance.
  std::complex<double> complex_normal(double variance) {
    const auto [g1, g2] = normal_pair();
    const double s = std::sqrt(variance / 2.0);
    return {s * g1, s * g2};
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace mlt
