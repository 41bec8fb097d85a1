#pragma once

#include <cstdint>

namespace cyclic_swarm {

/// PCG32 (O'Neill 2014), variant XSH-RR with 64-bit LCG state and 32-bit output.
///
///   state' = state * 6364136223846793005 + (stream << 1 | 1)
///   out    = rotr32(((state >> 18) ^ state) >> 27, state >> 59)
///
/// Seeding follows the reference `pcg32_srandom_r`. Doubles are built from
/// 53 bits taken from two consecutive outputs, so a given seed yields the same
/// sequence on every platform and standard library.
class Pcg32 {
 public:
  static constexpr std::uint64_t kDefaultStream = 0xda3e39cb94b95bdbULL;

  explicit Pcg32(std::uint64_t seed, std::uint64_t stream = kDefaultStream) {
    inc_ = (stream << 1u) | 1u;
    next_u32();
    state_ += seed;
    next_u32();
  }

  std::uint32_t next_u32() {
    const std::uint64_t old = state_;
    state_ = old * 6364136223846793005ULL + inc_;
    const auto xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
    const auto rot = static_cast<std::uint32_t>(old >> 59u);
    return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
  }

  /// Uniform on [0, 1).
  double uniform01() {
    const std::uint64_t hi = next_u32() >> 5;  // 27 bits
    const std::uint64_t lo = next_u32() >> 6;  // 26 bits
    return static_cast<double>((hi << 26) | lo) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, bound) by rejection (no modulo bias).
  std::uint32_t below(std::uint32_t bound) {
    const std::uint32_t threshold = (0u - bound) % bound;
    for (;;) {
      const std::uint32_t r = next_u32();
      if (r >= threshold) return r % bound;
    }
  }

 private:
  std::uint64_t state_{0};
  std::uint64_t inc_{0};
};

}  // namespace cyclic_swarm
