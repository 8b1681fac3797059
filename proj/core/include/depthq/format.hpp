#pragma once

#include <string>
#include <string_view>

namespace depthq {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_real(double value);

/// Parses a whole string as a double; throws FormatError naming `what`.
double parse_real(std::string_view text, std::string_view what);

/// Parses a whole string as an unsigned integer; throws FormatError naming `what`.
unsigned long long parse_unsigned(std::string_view text, std::string_view what);

}  // namespace depthq
