#pragma once

#include <functional>

namespace shadowcg {

/// Golden-section search for a unimodal function on [lo, hi]. Stops once the
/// bracket is below tol (1 + |hi|) or after 200 iterations; the endpoints are
/// compared last, so a boundary minimum is returned exactly.
double golden_section(const std::function<double(double)>& f_along, double lo, double hi,
                      double tol = 1e-10);

}  // namespace shadowcg
