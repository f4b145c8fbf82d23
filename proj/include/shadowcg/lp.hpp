#pragma once

#include <limits>

#include "shadowcg/linalg.hpp"

namespace shadowcg::lp {

/// min objective^T y  s.t.  G y <= h,  E y = f,  lower <= y <= upper.
/// Empty G/E/bounds are allowed; bound vectors of size zero mean "free".
struct LinearProgram {
  Vector objective;
  DenseMatrix G;
  Vector h;
  DenseMatrix E;
  Vector f;
  Vector lower;
  Vector upper;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  Vector point;
  double value = 0.0;
  int pivots = 0;
};

/// Dense two-phase simplex, Bland's rule throughout.
LpSolution solve_lp(const LinearProgram& p);

/// Largest t in [0, cap] with p + t v in cone(rows of generators).
/// Returns +inf when cap is infinite and the ray never leaves the cone.
double max_cone_step(const DenseMatrix& generators, const Vector& p, const Vector& v,
                     double cap = std::numeric_limits<double>::infinity());

/// max lambda >= lambda_x  s.t.  x0 - lambda w - x - (lambda - lambda_x) dhat in cone(A_I^T),
/// with lambda capped at `cap` (pass +inf for the uncapped LP).
double max_inface_lambda(const DenseMatrix& A_I, const Vector& x0, const Vector& w,
                         const Vector& x, double lambda_x, const Vector& dhat,
                         double cap = std::numeric_limits<double>::infinity());

}  // namespace shadowcg::lp
