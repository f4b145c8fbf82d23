#pragma once

#include <string>

namespace shadowcg {

/// Round-trip decimal form (%.17g); "inf", "-inf" and "nan" for non-finite values.
std::string format_number(double v);

}  // namespace shadowcg
