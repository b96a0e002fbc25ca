#pragma once

// Small text helpers shared by the parsers and serializers.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace subrank {

std::string_view trim(std::string_view s) noexcept;
std::vector<std::string_view> split(std::string_view s, char sep);

/// Strict numeric parsing: the whole field must be consumed. `what` names the
/// field in the InvalidInput message.
double parse_double(std::string_view s, std::string_view what);
std::size_t parse_size(std::string_view s, std::string_view what);

/// Shortest decimal rendering that round-trips exactly.
std::string format_double(double v);

}  // namespace subrank
