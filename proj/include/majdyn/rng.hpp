// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace majdyn {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Version tag of the per-trial seed derivation; written into every report.
inline constexpr const char* kSeedDerivation =
    "v1: seed(trial) = splitmix64(master ^ (0x9E3779B97F4A7C15 * (trial + 1)))";

/// Seed for trial `index` of a campaign. Depends only on (master, index), so a
/// trial draws the same randomness regardless of which worker runs it.
inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return splitmix64(master ^ (0x9E3779B97F4A7C15ULL * (index + 1)));
}

/// xoshiro256** (Blackman & Vigna). Satisfies UniformRandomBitGenerator.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed) noexcept {
    std::uint64_t z = seed;
    for (auto& w : s_) {
      w = splitmix64(z);
      z += 0x9E3779B97F4A7C15ULL;
    }
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
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

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
};

/// Produces 64 independent Bernoulli(p) bits per call, p quantized to 2^-64.
///
/// Bits are built from the binary expansion of p: scanning the expansion from
/// its lowest set bit upwards, a fresh uniform word is OR-ed in for a 1 digit
/// and AND-ed in for a 0 digit. Cost is (64 - trailing zeros) words per call,
/// i.e. one word for p = 1/2.
class BernoulliWords {
 public:
  explicit BernoulliWords(double p) noexcept {
    if (p <= 0.0) {
      mode_ = Mode::kZero;
    } else if (p >= 1.0) {
      mode_ = Mode::kOne;
    } else {
      mode_ = Mode::kExpansion;
      // p * 2^64 as an integer; exact for every double in (0,1) down to 2^-64.
      threshold_ = static_cast<std::uint64_t>(std::ldexp(p, 64));
      if (threshold_ == 0) mode_ = Mode::kZero;
      low_bit_ = threshold_ ? __builtin_ctzll(threshold_) : 64;
    }
  }

  template <class Engine>
  std::uint64_t operator()(Engine& eng) const noexcept {
    switch (mode_) {
      case Mode::kZero:
        return 0;
      case Mode::kOne:
        return ~0ULL;
      case Mode::kExpansion:
        break;
    }
    std::uint64_t bits = 0;
    for (int k = low_bit_; k < 64; ++k) {
      const std::uint64_t r = eng();
      bits = ((threshold_ >> k) & 1ULL) ? (bits | r) : (bits & r);
    }
    return bits;
  }

  /// Exact per-bit success probability after quantization.
  double effective_p() const noexcept {
    switch (mode_) {
      case Mode::kZero:
        return 0.0;
      case Mode::kOne:
        return 1.0;
      default:
        return std::ldexp(static_cast<double>(threshold_), -64);
    }
  }

 private:
  enum class Mode { kZero, kOne, kExpansion };
  Mode mode_ = Mode::kZero;
  std::uint64_t threshold_ = 0;
  int low_bit_ = 64;
};

}  // namespace majdyn
