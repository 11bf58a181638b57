// Seeded random streams with a platform-independent output sequence.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace pdmpnet {

/// SplitMix64 finalizer, used to derive stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// A 64-bit Mersenne Twister stream identified by (master seed, index).
/// Uniforms are built from the top 53 bits so sequences do not depend on
/// the standard library's distribution implementations.
class RandomStream {
 public:
  RandomStream(std::uint64_t master_seed, std::uint64_t stream_index)
      : master_(master_seed), index_(stream_index) {
    const std::uint64_t a = splitmix64(master_seed);
    const std::uint64_t b = splitmix64(a ^ splitmix64(stream_index + 1));
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    engine_.seed(seq);
  }

  /// Uniform on [0, 1).
  double uniform() {
    ++consumed_;
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Standard exponential variate.
  double exponential() { return -std::log1p(-uniform()); }

  /// Standard normal via Box-Muller (one variate per call).
  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  std::uint64_t master_seed() const { return master_; }
  std::uint64_t stream_index() const { return index_; }
  std::uint64_t consumed() const { return consumed_; }

 private:
  std::mt19937_64 engine_;
  std::uint64_t master_;
  std::uint64_t index_;
  std::uint64_t consumed_ = 0;
};

}  // namespace pdmpnet
