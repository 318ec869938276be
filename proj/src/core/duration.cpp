#include "harmonia/core/duration.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace harmonia {

SimTime parse_duration(std::string_view text) {
  std::string s(text);
  if (s.empty()) throw std::invalid_argument("empty duration");
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad duration: " + s);
  }
  std::string unit = s.substr(pos);
  double scale = 1;
  if (unit.empty() || unit == "ns") scale = 1;
  else if (unit == "us") scale = 1e3;
  else if (unit == "ms") scale = 1e6;
  else if (unit == "s") scale = 1e9;
  else throw std::invalid_argument("bad duration unit: " + s);
  if (v < 0 || !std::isfinite(v)) throw std::invalid_argument("negative duration: " + s);
  return static_cast<SimTime>(std::llround(v * scale));
}

std::string format_duration(SimTime t) {
  if (t != 0 && t % kSecond == 0) return std::to_string(t / kSecond) + "s";
  if (t != 0 && t % kMillisecond == 0) return std::to_string(t / kMillisecond) + "ms";
  if (t != 0 && t % kMicrosecond == 0) return std::to_string(t / kMicrosecond) + "us";
  return std::to_string(t) + "ns";
}

}  // namespace harmonia
