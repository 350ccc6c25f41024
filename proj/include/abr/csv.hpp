#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace abr::csv {

// Splits one CSV line on commas. No quoting support: none of the repo's
// file formats embed commas in fields.
std::vector<std::string> split(std::string_view line);

// Parses a decimal number ('.' separator). Throws ParseError on anything
// else, including trailing garbage.
double parse_double(std::string_view field, std::string_view context);

long long parse_int(std::string_view field, std::string_view context);

// Empty field <-> absent value.
std::optional<double> parse_optional_double(std::string_view field,
                                            std::string_view context);

// Fixed two-decimal rendering ("1289.52"), no grouping.
std::string format_fixed2(double v);

// Shortest representation that parses back to the same double.
std::string format_exact(double v);

} // namespace abr::csv
