#include "spdc/units.hpp"

#include <charconv>
#include <string>

#include "spdc/errors.hpp"

namespace spdc {

double parse_length(std::string_view text) {
    auto trim = [](std::string_view s) {
        while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
        while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
        return s;
    };
    std::string_view s = trim(text);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr == s.data())
        throw ConfigError("cannot parse length '" + std::string(text) + "'");
    std::string_view unit = trim(std::string_view(ptr, s.data() + s.size() - ptr));
    if (unit.empty() || unit == "m") return value;
    if (unit == "mm") return value * mm;
    if (unit == "um" || unit == "µm") return value * um;
    if (unit == "nm") return value * nm;
    throw ConfigError("unknown length unit '" + std::string(unit) + "' in '" + std::string(text) + "'");
}

}  // namespace spdc
