#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace bounty {

// Shortest decimal text that parses back to the identical double.
std::string format_number(double value);

// Strict parse: the whole view must be a finite decimal number.
std::optional<double> parse_number(std::string_view text);

}  // namespace bounty
