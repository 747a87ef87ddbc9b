#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>

namespace execlab::rng {

/// SplitMix64: tiny generator used for seeding and stream derivation.
class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) : state_(seed) {}

  constexpr std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// xoshiro256**: fast 64-bit generator with 2^256-1 period.
///
/// Deliberately hand-rolled (rather than std::normal_distribution et al.)
/// because standard-library distribution output is implementation-defined;
/// everything here is exact integer/IEEE arithmetic, so seeded runs are
/// bit-reproducible across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    SplitMix64 sm(seed);
    for (auto& word : s_) word = sm.next();
  }

  /// Independent substream for (seed, stream_id). Used to give each
  /// episode / purpose its own generator so that strategies evaluated on
  /// paired paths consume identical noise regardless of call order.
  static Rng stream(std::uint64_t seed, std::uint64_t stream_id) {
    SplitMix64 sm(seed);
    std::uint64_t a = sm.next();
    std::uint64_t b = sm.next();
    SplitMix64 mixed(a ^ (stream_id * 0xd1342543de82ef95ULL + b));
    return Rng(mixed.next());
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1) with 53 random mantissa bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller. One fresh pair of uniforms per call;
  /// the sine mate is discarded to keep the draw count predictable.
  double normal() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    // 1-u1 lies in (0,1], so the log is finite.
    const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Uniform integer in {0, ..., bound-1} via 128-bit multiply-shift.
  int uniform_int(int bound) {
    if (bound <= 0) throw std::invalid_argument("uniform_int: bound must be positive");
    const auto wide = static_cast<unsigned __int128>(next_u64()) * static_cast<std::uint64_t>(bound);
    return static_cast<int>(wide >> 64);
  }

  /// Binomial(n, p) as a sum of Bernoulli draws; n is small here (<= q0).
  int binomial(int n, double p) {
    if (n < 0) throw std::invalid_argument("binomial: n must be non-negative");
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("binomial: p must lie in [0,1]");
    int count = 0;
    for (int i = 0; i < n; ++i) count += uniform01() < p ? 1 : 0;
    return count;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> s_{};
};

}  // namespace execlab::rng
