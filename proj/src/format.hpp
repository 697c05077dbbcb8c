#pragma once

#include <cstdio>
#include <string>

namespace layered_ot::detail {

/// Shortest round-trip-safe text for a double; "-0" is printed as "0".
inline std::string fmt_real(double v, int precision = 17) {
  if (v == 0.0) v = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return buf;
}

}  // namespace layered_ot::detail
