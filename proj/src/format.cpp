#include "shadowcg/format.hpp"

#include <cmath>
#include <cstdio>

namespace shadowcg {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace shadowcg
