#pragma once

#include <charconv>
#include <cstddef>
#include <string>
#include <string_view>
#include <system_error>

#include "she/types.hpp"

namespace she {

/// Shortest decimal string that parses back to exactly the same double.
inline std::string fmt_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

/// Fixed-point formatting with `precision` digits after the decimal point.
inline std::string fmt_fixed(double v, int precision) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v,
                                 std::chars_format::fixed, precision);
  return std::string(buf, ptr);
}

/// Strict full-field double parse; throws ParseError on any trailing junk.
inline double parse_double(std::string_view field, std::size_t line,
                           std::string_view column) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size())
    throw ParseError("line " + std::to_string(line) + ": cannot parse '" +
                         std::string(field) + "' as a number in column " +
                         std::string(column),
                     line);
  return v;
}

}  // namespace she
