#pragma once

#include <numbers>
#include <string_view>

namespace spdc {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

inline constexpr double nm = 1e-9;
inline constexpr double um = 1e-6;
inline constexpr double mm = 1e-3;

// Parses "532 nm", "9.6um", "10 mm", "0.01" (bare number = meters).
// Throws ConfigError on an unknown suffix or unparsable number.
double parse_length(std::string_view text);

}  // namespace spdc
