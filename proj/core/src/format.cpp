#include "depthq/format.hpp"

#include <charconv>
#include <cmath>

#include "depthq/error.hpp"

namespace depthq {

std::string format_real(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

double parse_real(std::string_view text, std::string_view what) {
  if (text == "nan") return std::nan("");
  if (text == "inf") return HUGE_VAL;
  if (text == "-inf") return -HUGE_VAL;
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end || text.empty()) {
    throw FormatError(std::string(what) + ": expected a number, got '" + std::string(text) + "'");
  }
  return v;
}

unsigned long long parse_unsigned(std::string_view text, std::string_view what) {
  unsigned long long v = 0;
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end || text.empty()) {
    throw FormatError(std::string(what) + ": expected a non-negative integer, got '" +
                      std::string(text) + "'");
  }
  return v;
}

}  // namespace depthq
