#pragma once

#include <string>
#include <string_view>

#include "harmonia/core/types.hpp"

namespace harmonia {

// "250ns", "10us", "1.5ms", "20s"; a bare number is nanoseconds.
// Throws std::invalid_argument on malformed input.
SimTime parse_duration(std::string_view text);

std::string format_duration(SimTime t);

}  // namespace harmonia
