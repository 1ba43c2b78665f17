#ifndef CONSTRUE_TIME_TYPES_HPP
#define CONSTRUE_TIME_TYPES_HPP

#include <cstdint>
#include <limits>
#include <optional>
#include <string>

namespace construe {

// All times are integer milliseconds. Interval arithmetic on domains stays
// exact; there is no float-equality hazard in constraint propagation.
using TimeMs = std::int64_t;

// Sentinel for unbounded interval ends. Kept far from the int64 limits so
// saturating min/+ arithmetic never overflows.
inline constexpr TimeMs kTimeInf = std::int64_t{1} << 60;

struct TimeInterval {
  TimeMs lo = -kTimeInf;
  TimeMs hi = kTimeInf;

  bool bound() const { return lo == hi; }
  bool empty() const { return lo > hi; }
  bool contains(TimeMs t) const { return lo <= t && t <= hi; }

  bool operator==(const TimeInterval&) const = default;
};

// Saturating addition over the extended time line.
inline TimeMs sat_add(TimeMs a, TimeMs b) {
  if (a >= kTimeInf || b >= kTimeInf) return kTimeInf;
  if (a <= -kTimeInf || b <= -kTimeInf) return -kTimeInf;
  TimeMs s = a + b;
  if (s > kTimeInf) return kTimeInf;
  if (s < -kTimeInf) return -kTimeInf;
  return s;
}

// Parses a time literal. Accepted forms:
//   "463"        -> 463 ms
//   "0.463"      -> fractional seconds, converted to ms
//   "12:16.977"  -> mm:ss.fff
// Returns nullopt on malformed input.
std::optional<TimeMs> parse_time(const std::string& text);

std::string format_time(TimeMs t);

}  // namespace construe

#endif
