#pragma once

#include <cstdint>
#include <compare>
#include <numeric>
#include <string>

namespace teamform {

// Simulation time is fixed-point: one abstract time unit (the maximum message
// delay) equals 2^30 ticks. The event queue never touches floating point.
using Tick = std::int64_t;
inline constexpr Tick kTicksPerUnit = Tick{1} << 30;

constexpr Tick ticks_from_units(double units) {
  return static_cast<Tick>(units * static_cast<double>(kTicksPerUnit) + 0.5);
}
constexpr double units_from_ticks(Tick t) {
  return static_cast<double>(t) / static_cast<double>(kTicksPerUnit);
}

// Concurrent nominal ticks are resolved by a monotone sequence number assigned
// at scheduling time, so two distinct events never share a SimTime. Normal
// events get sequence numbers spaced kSeqStride apart; an event scheduled to
// run "immediately after" event e (a fake injection of remainder tokens) gets
// e.seq + 1, which orders it before every other pending event: anything else
// pending at the same tick carries a strictly larger strided seq.
inline constexpr std::uint64_t kSeqStride = std::uint64_t{1} << 20;

struct SimTime {
  Tick ticks = 0;
  std::uint64_t seq = 0;

  friend auto operator<=>(const SimTime&, const SimTime&) = default;
};

// Exact decimal-free rendering of a tick count as a reduced rational, e.g.
// ticks 3 * 2^28 -> "3/4". Used by the JSONL log's `t` field.
inline std::string rational_string(Tick t) {
  std::int64_t num = t;
  std::int64_t den = kTicksPerUnit;
  bool neg = num < 0;
  if (neg) num = -num;
  std::int64_t g = std::gcd(num, den);
  num /= g;
  den /= g;
  std::string s = neg ? "-" : "";
  s += std::to_string(num);
  if (den != 1) {
    s += '/';
    s += std::to_string(den);
  }
  return s;
}

}  // namespace teamform
