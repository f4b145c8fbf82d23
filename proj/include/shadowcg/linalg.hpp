#pragma once

#include <Eigen/Dense>

namespace shadowcg {

using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;

namespace linalg {

/// Relative rank threshold shared by every rank-revealing solve.
inline constexpr double kRankTolerance = 1e-10;

bool all_finite(const Vector& v);
bool all_finite(const DenseMatrix& m);

/// Throws Error(NonFiniteInput) naming `what` if any entry is NaN or infinite.
void require_finite(const Vector& v, const char* what);
void require_finite(const DenseMatrix& m, const char* what);

/// Minimum-norm minimizer of ||M y - rhs||.
Vector least_squares(const DenseMatrix& M, const Vector& rhs);

/// I - M^+ M: orthogonal projector onto the nullspace of M.
DenseMatrix pseudoinverse_projector(const DenseMatrix& M);

/// Orthonormal basis (as columns) of the nullspace of M.
DenseMatrix nullspace_basis(const DenseMatrix& M);

struct NnlsResult {
  Vector mu;        // one multiplier per generator (row of M), all >= 0
  Vector residual;  // rhs - M^T mu
  int iterations = 0;
};

/// Projects `rhs` onto the cone generated by the rows of M:
///   min ||M^T mu - rhs||  subject to  mu >= 0.
/// Lawson-Hanson active-set method. The inner least-squares problems go
/// through the same rank-revealing path as least_squares().
NnlsResult nnls(const DenseMatrix& M, const Vector& rhs);

/// KKT tolerance used by nnls: 1e-10 (1 + ||rhs||).
double nnls_tolerance(const Vector& rhs);

}  // namespace linalg
}  // namespace shadowcg
