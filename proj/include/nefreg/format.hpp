#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace nefreg {

// Shortest decimal that parses back to the same double; "nan"/"inf" spelled
// out for non-finite values.
inline std::string shortest(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace nefreg
