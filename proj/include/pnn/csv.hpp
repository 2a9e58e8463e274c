#pragma once

#include <cstdio>
#include <string>

namespace pnn {

/// 17-significant-digit decimal form; round-trips any finite double exactly.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace pnn
