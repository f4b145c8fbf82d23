#pragma once

#include <vector>

#include "shadowcg/polytope.hpp"

namespace shadowcg {

struct ProjectionResult {
  Vector point;
  ActiveSet active;
  Vector multipliers;  // per active row, from the normal-cone certificate
  int iterations = 0;
};

/// Euclidean projection onto P. Box, simplex and l1 ball use closed forms;
/// other kinds run the primal active-set QP, optionally warm-started at a
/// feasible point.
ProjectionResult project(const Polytope& P, const Vector& y, const Vector* warm_start = nullptr);

/// g(lambda) = project(x0 - lambda w) for each lambda, warm-started along the list.
std::vector<Vector> sample_curve(const Polytope& P, const Vector& x0, const Vector& w,
                                 const std::vector<double>& lambdas);

struct QpResult {
  Vector point;
  double value = 0.0;  // 1/2 x^T Q x + c^T x
  int iterations = 0;
};

/// min 1/2 x^T Q x + c^T x over an explicit polytope (Q symmetric PSD).
QpResult solve_qp(const Polytope& P, const DenseMatrix& Q, const Vector& c,
                  const Vector* start = nullptr);

}  // namespace shadowcg
