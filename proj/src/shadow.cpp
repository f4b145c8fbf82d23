#include "shadowcg/shadow.hpp"

#include <vector>

#include "shadowcg/error.hpp"

namespace shadowcg {

ConeProjection shadow(const NormalCone& cone, const Vector& w) {
  linalg::require_finite(w, "shadow: w");
  ConeProjection out;
  out.active = cone.active();
  const Vector v = -w;
  ConeSplit cs = cone.project(v);
  out.normal_part = std::move(cs.normal);
  out.multipliers = std::move(cs.multipliers);
  out.shadow = v - out.normal_part;
  // NNLS leaves a_i d at rounding level relative to |w|, which can still point
  // out of P when the shadow itself is tiny; remove those components.
  const DenseMatrix rows = cone.active_rows();
  const Vector raw = out.shadow;
  std::vector<bool> pinned(static_cast<std::size_t>(rows.rows()), false);
  for (int round = 0; round < 5 && rows.rows() > 0; ++round) {
    const Vector ad = rows * out.shadow;
    bool fresh = false;
    for (Eigen::Index i = 0; i < ad.size(); ++i) {
      if (ad[i] > 0.0 && !pinned[static_cast<std::size_t>(i)]) {
        pinned[static_cast<std::size_t>(i)] = true;
        fresh = true;
      }
    }
    if (!fresh) break;
    std::vector<Eigen::Index> viol;
    for (Eigen::Index i = 0; i < ad.size(); ++i) {
      if (pinned[static_cast<std::size_t>(i)]) viol.push_back(i);
    }
    const DenseMatrix Av = rows(viol, Eigen::all);
    out.shadow -= Av.transpose() * linalg::least_squares(Av.transpose(), out.shadow);
  }
  // Cleaning must not cost the descent property <v, d> = |d|^2.
  if (v.dot(out.shadow) < 0.5 * out.shadow.squaredNorm()) out.shadow = raw;
  return out;
}

ConeProjection shadow(const Polytope& P, const Vector& x, const Vector& w) {
  if (x.size() != P.dim() || w.size() != P.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "shadow: dimension");
  }
  return shadow(NormalCone(P, x), w);
}

InFaceShadow in_face_shadow(const Polytope& P, const Vector& x, const Vector& w) {
  if (x.size() != P.dim() || w.size() != P.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "in_face_shadow: dimension");
  }
  linalg::require_finite(w, "in_face_shadow: w");
  return InFaceShadow{NormalCone(P, x).face_direction(-w)};
}

bool is_stationary(const ConeProjection& cp) {
  const double scale = cp.normal_part.size() > 0 ? cp.normal_part.norm() : 0.0;
  return cp.shadow.norm() <= 1e-9 * (1.0 + scale);
}

}  // namespace shadowcg
