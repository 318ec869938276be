#include "harmonia/protocols/gates.hpp"

#include <cmath>
#include <stdexcept>

#include "harmonia/core/duration.hpp"

namespace harmonia::protocols {

CompletionPolicy parse_completion_policy(std::string_view text) {
  if (text == "quorum") return {CompletionDelay::Quorum, 0};
  if (text == "all") return {CompletionDelay::All, 0};
  if (text.substr(0, 3) == "ms:") {
    std::string rest(text.substr(3));
    std::size_t pos = 0;
    double ms = 0;
    try {
      ms = std::stod(rest, &pos);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad completion-delay: " + std::string(text));
    }
    if (pos != rest.size() || !(ms >= 0)) {
      throw std::invalid_argument("bad completion-delay: " + std::string(text));
    }
    return {CompletionDelay::Timeout, static_cast<SimTime>(std::llround(ms * kMillisecond))};
  }
  throw std::invalid_argument("completion-delay must be quorum, all or ms:<k>");
}

std::string to_string(const CompletionPolicy& p) {
  switch (p.kind) {
    case CompletionDelay::Quorum: return "quorum";
    case CompletionDelay::All: return "all";
    case CompletionDelay::Timeout: {
      std::string s = std::to_string(static_cast<double>(p.timeout) / kMillisecond);
      while (s.size() > 1 && s.back() == '0') s.pop_back();
      if (s.back() == '.') s.pop_back();
      return "ms:" + s;
    }
  }
  return "all";
}

}  // namespace harmonia::protocols
