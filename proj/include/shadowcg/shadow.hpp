#pragma once

#include "shadowcg/polytope.hpp"

namespace shadowcg {

/// Moreau split of -w at x: shadow in T_P(x), normal_part in N_P(x).
struct ConeProjection {
  Vector shadow;
  Vector normal_part;
  Vector multipliers;
  ActiveSet active;
};

struct InFaceShadow {
  Vector direction;
};

ConeProjection shadow(const Polytope& P, const Vector& x, const Vector& w);
ConeProjection shadow(const NormalCone& cone, const Vector& w);

/// (I - A_I^+ A_I)(-w); -w when no constraint is tight.
InFaceShadow in_face_shadow(const Polytope& P, const Vector& x, const Vector& w);

bool is_stationary(const ConeProjection& cp);

}  // namespace shadowcg
