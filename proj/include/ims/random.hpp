#pragma once

// Counter-based random numbers: Philox4x32-10. A stream is identified by a
// 64-bit key and a 96-bit counter prefix; the last counter word advances.

#include <array>
#include <cmath>
#include <cstdint>

namespace ims {

using Philox4x32Counter = std::array<std::uint32_t, 4>;
using Philox4x32Key = std::array<std::uint32_t, 2>;

constexpr Philox4x32Counter philox4x32_10(Philox4x32Counter ctr, Philox4x32Key key) noexcept {
  constexpr std::uint32_t kM0 = 0xD2511F53u;
  constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u;
  constexpr std::uint32_t kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kW0;
      key[1] += kW1;
    }
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

/// Uniform on the open interval (0, 1) from 52 bits of two words.
constexpr double open_unit_interval(std::uint32_t hi, std::uint32_t lo) noexcept {
  const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 20) ^ (static_cast<std::uint64_t>(lo) >> 12);
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-52;
}

/// Sequential uniforms from one (key, prefix) substream.
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, std::uint32_t w0, std::uint32_t w1, std::uint32_t w2, std::uint32_t base = 0)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        prefix_{w0, w1, w2},
        next_call_(base) {}

  double uniform() {
    if (cached_ == 0) {
      block_ = philox4x32_10({prefix_[0], prefix_[1], prefix_[2], next_call_++}, key_);
      cached_ = 2;
      return open_unit_interval(block_[0], block_[1]);
    }
    cached_ = 0;
    return open_unit_interval(block_[2], block_[3]);
  }

  /// Exponential with the given rate.
  double exponential(double rate) { return -std::log(uniform()) / rate; }

  std::uint32_t calls() const noexcept { return next_call_; }

 private:
  Philox4x32Key key_;
  std::array<std::uint32_t, 3> prefix_;
  std::uint32_t next_call_;
  Philox4x32Counter block_{};
  int cached_ = 0;
};

/// splitmix64 finalizer, used to spread user seeds across key space.
constexpr std::uint64_t mix_seed(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace ims
