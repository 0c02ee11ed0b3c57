#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace lecam {

// Every number leaving the library is printed with 12 significant digits.
inline std::string format_number(double x) {
  if (x == 0.0) return "0";  // folds -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

// x rounded to 12 significant digits, for serializers that print the
// shortest round-trip representation.
inline double round12(double x) {
  if (!std::isfinite(x) || x == 0.0) return x == 0.0 ? 0.0 : x;
  return std::stod(format_number(x));
}

}  // namespace lecam
