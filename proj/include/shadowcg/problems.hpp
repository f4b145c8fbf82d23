#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "shadowcg/polytope.hpp"

namespace shadowcg {

/// f(x) = 1/2 x^T Q x + c^T x + constant.
struct QuadraticObjective {
  DenseMatrix Q;
  Vector c;
  double constant = 0.0;
  double mu = 0.0;  // smallest eigenvalue of Q (clamped at 0)
  double L = 0.0;   // largest eigenvalue of Q

  /// Validates symmetry and fills mu and L.
  static QuadraticObjective make(DenseMatrix Q, Vector c, double constant = 0.0);
  double value(const Vector& x) const;
  /// f(x + t d) - f(x) as t <g, d> + t^2/2 d^T Q d; free of cancellation.
  std::function<double(double)> along(const Vector& x, const Vector& d) const;
};

Vector gradient(const QuadraticObjective& f, const Vector& x);

struct Instance {
  Polytope polytope;
  QuadraticObjective objective;
  Vector x0;
  std::uint64_t seed = 0;
  std::string name;
};

/// ||M x - b||^2 over the l1 ball; M Gaussian, b = M x_true + 0.01 noise with
/// `sparsity` entries of x_true equal to +-1. radius <= 0 selects ||x_true||_1
/// (or 1 when x_true = 0). Starts at radius * e_1.
Instance make_lasso(int rows, int cols, int sparsity, double radius, std::uint64_t seed);

/// Layered DAG: source, n_layers layers of `width` nodes (complete between
/// consecutive layers), sink. Node 0 is the source and the last node the sink.
FlowGraph layered_dag(int n_layers, int width);

/// Random strongly convex quadratic (Q = G^T G + 0.1 I) over the layered flow
/// polytope, started at the LO vertex for a random direction.
Instance make_flow_quadratic(int n_layers, int width, std::uint64_t seed);

}  // namespace shadowcg
