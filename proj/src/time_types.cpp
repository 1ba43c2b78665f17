#include "construe/time_types.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

namespace construe {

std::optional<TimeMs> parse_time(const std::string& text) {
  if (text.empty()) return std::nullopt;
  auto colon = text.find(':');
  if (colon != std::string::npos) {
    // mm:ss.fff
    const std::string mm = text.substr(0, colon);
    const std::string rest = text.substr(colon + 1);
    if (mm.empty() || rest.empty()) return std::nullopt;
    for (char c : mm)
      if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
    char* end = nullptr;
    const double secs = std::strtod(rest.c_str(), &end);
    if (end == rest.c_str() || *end != '\0' || secs < 0.0) return std::nullopt;
    const long long mins = std::strtoll(mm.c_str(), nullptr, 10);
    return static_cast<TimeMs>(mins) * 60000 +
           static_cast<TimeMs>(std::llround(secs * 1000.0));
  }
  if (text.find('.') != std::string::npos) {
    // fractional seconds
    char* end = nullptr;
    const double secs = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || *end != '\0') return std::nullopt;
    return static_cast<TimeMs>(std::llround(secs * 1000.0));
  }
  char* end = nullptr;
  const long long ms = std::strtoll(text.c_str(), &end, 10);
  if (end == text.c_str() || *end != '\0') return std::nullopt;
  return static_cast<TimeMs>(ms);
}

std::string format_time(TimeMs t) {
  if (t >= kTimeInf) return "+inf";
  if (t <= -kTimeInf) return "-inf";
  return std::to_string(t);
}

}  // namespace construe
