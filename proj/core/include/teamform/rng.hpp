#pragma once

#include <cstdint>

namespace teamform {

// xoshiro256++ with splitmix64 seeding. Self-contained so replays are exact
// on any platform/toolchain; the standard <random> distributions are
// implementation-defined and must not be used anywhere determinism matters.
class Rng {
 public:
  Rng() : Rng(0) {}
  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& w : s_) w = splitmix64(x);
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Unbiased uniform draw in [0, n). Rejection sampling on the top of the
  // 64-bit range; expected < 2 draws.
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return x % n;
  }

  // Uniform in [lo, hi], inclusive on both ends.
  std::int64_t range(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(
                    below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  bool coin() { return (next() >> 63) != 0; }

  // True with probability num/2^64.
  bool chance_u64(std::uint64_t threshold) { return next() < threshold; }

  // Uniform double in [0,1) with 53 bits; only for Monte-Carlo statistics,
  // never for event scheduling.
  double uniform01() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  static std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9E3779B97f4A7C15ull;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

 private:
  static std::uint64_t rotl(std::uint64_t v, int k) {
    return (v << k) | (v >> (64 - k));
  }
  std::uint64_t s_[4];
};

// Derives independent named streams from a master seed. Streams used by the
// simulator: "factory" (per-node overlay coin tosses, part of the initial
// state), "node" (per-node runtime coins), "adv" (adversary decisions),
// "trial" (Monte-Carlo trial streams).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t domain,
                                 std::uint64_t id = 0, std::uint64_t sub = 0) {
  std::uint64_t x = master;
  Rng::splitmix64(x);
  x ^= 0x6A09E667F3BCC909ull * (domain + 1);
  Rng::splitmix64(x);
  x ^= 0xBB67AE8584CAA73Bull * (id + 1);
  Rng::splitmix64(x);
  x ^= 0x3C6EF372FE94F82Bull * (sub + 1);
  return Rng::splitmix64(x);
}

// Stream domains.
inline constexpr std::uint64_t kStreamFactory = 1;
inline constexpr std::uint64_t kStreamNode = 2;
inline constexpr std::uint64_t kStreamAdversary = 3;
inline constexpr std::uint64_t kStreamTrial = 4;
inline constexpr std::uint64_t kStreamApp = 5;

}  // namespace teamform
