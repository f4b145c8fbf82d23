#include "shadowcg/line_search.hpp"

#include <cmath>

#include "shadowcg/error.hpp"

namespace shadowcg {

double golden_section(const std::function<double(double)>& f_along, double lo, double hi,
                      double tol) {
  if (!(lo <= hi)) throw Error(ErrorCode::InvalidArgument, "golden_section: lo > hi");
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    throw Error(ErrorCode::NonFiniteInput, "golden_section: bracket");
  }
  if (lo == hi) return lo;
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  const double width = tol * (1.0 + std::abs(hi));
  double a = lo, b = hi;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f_along(c), fd = f_along(d);
  for (int it = 0; it < 200 && (b - a) > width; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f_along(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f_along(d);
    }
  }
  double best = fc <= fd ? c : d;
  double fbest = std::min(fc, fd);
  const double flo = f_along(lo);
  const double fhi = f_along(hi);
  if (fhi <= fbest) {
    best = hi;
    fbest = fhi;
  }
  if (flo < fbest) best = lo;
  return best;
}

}  // namespace shadowcg
