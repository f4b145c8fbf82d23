#include "shadowcg/linalg.hpp"

#include <cmath>
#include <vector>

#include "shadowcg/error.hpp"

namespace shadowcg::linalg {

bool all_finite(const Vector& v) { return v.allFinite(); }
bool all_finite(const DenseMatrix& m) { return m.allFinite(); }

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw Error(ErrorCode::NonFiniteInput, what);
}

void require_finite(const DenseMatrix& m, const char* what) {
  if (!m.allFinite()) throw Error(ErrorCode::NonFiniteInput, what);
}

namespace {

Eigen::CompleteOrthogonalDecomposition<DenseMatrix> factor(const DenseMatrix& M) {
  Eigen::CompleteOrthogonalDecomposition<DenseMatrix> cod;
  // Eigen's threshold is relative to the largest diagonal entry of R, which
  // tracks the largest singular value for a column-pivoted QR.
  cod.setThreshold(kRankTolerance);
  cod.compute(M);
  return cod;
}

}  // namespace

Vector least_squares(const DenseMatrix& M, const Vector& rhs) {
  if (M.rows() != rhs.size()) {
    throw Error(ErrorCode::DimensionMismatch, "least_squares: rows(M) != len(rhs)");
  }
  require_finite(M, "least_squares: matrix");
  require_finite(rhs, "least_squares: rhs");
  if (M.cols() == 0) return Vector(0);
  if (M.rows() == 0) return Vector::Zero(M.cols());
  return factor(M).solve(rhs);
}

DenseMatrix pseudoinverse_projector(const DenseMatrix& M) {
  require_finite(M, "pseudoinverse_projector: matrix");
  const Eigen::Index n = M.cols();
  DenseMatrix P = DenseMatrix::Identity(n, n);
  if (M.rows() == 0 || n == 0) return P;
  // M^+ M is the projector onto the row space of M; build it from an
  // orthonormal basis of range(M^T) so the result is exactly symmetric.
  auto cod = factor(M.transpose());
  const Eigen::Index rank = cod.rank();
  if (rank == 0) return P;
  DenseMatrix Qr = cod.householderQ() * DenseMatrix::Identity(n, rank);
  P.noalias() -= Qr * Qr.transpose();
  return 0.5 * (P + P.transpose());
}

DenseMatrix nullspace_basis(const DenseMatrix& M) {
  require_finite(M, "nullspace_basis: matrix");
  const Eigen::Index n = M.cols();
  if (M.rows() == 0 || n == 0) return DenseMatrix::Identity(n, n);
  auto cod = factor(M.transpose());
  const Eigen::Index rank = cod.rank();
  DenseMatrix Qfull = cod.householderQ() * DenseMatrix::Identity(n, n);
  return Qfull.rightCols(n - rank);
}

double nnls_tolerance(const Vector& rhs) { return 1e-10 * (1.0 + rhs.norm()); }

NnlsResult nnls(const DenseMatrix& M, const Vector& rhs) {
  if (M.cols() != rhs.size()) {
    throw Error(ErrorCode::DimensionMismatch, "nnls: cols(M) != len(rhs)");
  }
  require_finite(M, "nnls: generators");
  require_finite(rhs, "nnls: rhs");

  const Eigen::Index k = M.rows();
  NnlsResult out;
  out.mu = Vector::Zero(k);
  out.residual = rhs;
  if (k == 0) return out;

  const DenseMatrix A = M.transpose();  // columns are generators
  // Per-generator entry threshold, well inside the documented KKT tolerance so
  // that downstream ratio tests see residuals at rounding level.
  const double kkt_tol = nnls_tolerance(rhs);
  Vector tol_row(k);
  for (Eigen::Index j = 0; j < k; ++j) tol_row[j] = std::min(kkt_tol, 1e-13 * (1.0 + rhs.norm()) * (1.0 + A.col(j).norm()));
  const int cap = 10 * static_cast<int>(M.rows() + M.cols());

  std::vector<bool> passive(k, false);
  std::vector<bool> banned(k, false);
  Vector x = Vector::Zero(k);

  // Generators with a single nonzero (bound normals) are eliminated together
  // with their coordinate, leaving a least-squares problem over the rest.
  std::vector<Eigen::Index> unit_coord(static_cast<std::size_t>(k), -1);
  for (Eigen::Index j = 0; j < k; ++j) {
    Eigen::Index nz = 0, at = -1;
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
      if (A(i, j) != 0.0) {
        ++nz;
        at = i;
      }
    }
    if (nz == 1) unit_coord[static_cast<std::size_t>(j)] = at;
  }

  auto solve_passive = [&](Vector& z) {
    std::vector<Eigen::Index> other;
    std::vector<Eigen::Index> owner(static_cast<std::size_t>(A.rows()), -1);
    for (Eigen::Index j = 0; j < k; ++j) {
      if (!passive[j]) continue;
      const Eigen::Index c = unit_coord[static_cast<std::size_t>(j)];
      if (c < 0) {
        other.push_back(j);
      } else if (owner[static_cast<std::size_t>(c)] < 0) {
        owner[static_cast<std::size_t>(c)] = j;
      }
    }
    std::vector<Eigen::Index> kept;
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
      if (owner[static_cast<std::size_t>(i)] < 0) kept.push_back(i);
    }
    z = Vector::Zero(k);
    Vector resid = rhs;
    if (!other.empty()) {
      const Vector zo = least_squares(A(kept, other), rhs(kept));
      for (std::size_t c = 0; c < other.size(); ++c) z[other[c]] = zo[static_cast<Eigen::Index>(c)];
      resid -= A(Eigen::all, other) * zo;
    }
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
      const Eigen::Index j = owner[static_cast<std::size_t>(i)];
      if (j >= 0) z[j] = resid[i] / A(i, j);
    }
  };

  int passes = 0;
  while (true) {
    Vector r = rhs - A * x;
    Vector w = A.transpose() * r;
    Eigen::Index enter = -1;
    double best = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (!passive[j] && !banned[j] && w[j] > tol_row[j] && w[j] > best) {
        best = w[j];
        enter = j;
      }
    }
    if (enter < 0) break;

    passive[enter] = true;
    Vector z;
    solve_passive(z);
    if (z[enter] <= 0.0) {
      // The entering generator is numerically dependent on the passive set;
      // skip it until the passive set changes.
      passive[enter] = false;
      banned[enter] = true;
      if (++passes > cap) throw Error(ErrorCode::IterationCap, "nnls: active-set loop");
      continue;
    }

    while (true) {
      if (++passes > cap) throw Error(ErrorCode::IterationCap, "nnls: active-set loop");
      bool all_positive = true;
      for (Eigen::Index j = 0; j < k; ++j) {
        if (passive[j] && z[j] <= 0.0) all_positive = false;
      }
      if (all_positive) {
        x = z;
        break;
      }
      double alpha = 1.0;
      for (Eigen::Index j = 0; j < k; ++j) {
        if (passive[j] && z[j] <= 0.0) {
          const double denom = x[j] - z[j];
          if (denom > 0.0) alpha = std::min(alpha, x[j] / denom);
        }
      }
      x += alpha * (z - x);
      for (Eigen::Index j = 0; j < k; ++j) {
        if (passive[j] && x[j] <= 1e-15 * (1.0 + std::abs(z[j]))) {
          passive[j] = false;
          x[j] = 0.0;
        }
      }
      solve_passive(z);
    }
    std::fill(banned.begin(), banned.end(), false);
  }

  for (Eigen::Index j = 0; j < k; ++j) x[j] = std::max(x[j], 0.0);
  out.mu = x;
  out.residual = rhs - A * x;
  out.iterations = passes;
  return out;
}

}  // namespace shadowcg::linalg
