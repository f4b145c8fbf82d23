#include "shadowcg/projection.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "shadowcg/error.hpp"

namespace shadowcg {

namespace {

// Projection of v onto {x >= 0, sum x = total}.
Vector simplex_projection(const Vector& v, double total) {
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumsum += u[j];
    const double t = (cumsum - total) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) theta = t;
  }
  return (v.array() - theta).max(0.0).matrix();
}

Vector closed_form(const Polytope& P, const Vector& y) {
  switch (P.kind()) {
    case PolytopeKind::Box:
      return y.cwiseMax(P.lower_bounds()).cwiseMin(P.upper_bounds());
    case PolytopeKind::Simplex:
      return simplex_projection(y, 1.0);
    case PolytopeKind::L1Ball: {
      if (y.lpNorm<1>() <= P.radius()) return y;
      const Vector mag = simplex_projection(y.cwiseAbs(), P.radius());
      Vector x(y.size());
      for (Eigen::Index j = 0; j < y.size(); ++j) x[j] = y[j] < 0.0 ? -mag[j] : mag[j];
      return x;
    }
    default:
      return y;
  }
}

// Rows with a single nonzero are bounds: in a working set they fix a
// coordinate, so only the general rows need a factorization, restricted to
// the coordinates left free.
std::vector<Eigen::Index> bound_columns(const DenseMatrix& A) {
  std::vector<Eigen::Index> col(static_cast<std::size_t>(A.rows()), -1);
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    Eigen::Index nz = 0, at = -1;
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      if (A(i, j) != 0.0) {
        ++nz;
        at = j;
      }
    }
    if (nz == 1) col[static_cast<std::size_t>(i)] = at;
  }
  return col;
}

struct WorkingSplit {
  std::vector<Eigen::Index> free_cols;
  std::vector<Eigen::Index> general;  // positions in W
  std::vector<Eigen::Index> bounds;   // positions in W
  bool duplicate_bound = false;
};

WorkingSplit split_working(const std::vector<int>& W, const std::vector<Eigen::Index>& bound_col, Eigen::Index n) {
  WorkingSplit s;
  std::vector<bool> fixed(static_cast<std::size_t>(n), false);
  for (std::size_t q = 0; q < W.size(); ++q) {
    const Eigen::Index j = bound_col[static_cast<std::size_t>(W[q])];
    if (j < 0) {
      s.general.push_back(static_cast<Eigen::Index>(q));
      continue;
    }
    if (fixed[static_cast<std::size_t>(j)]) s.duplicate_bound = true;
    fixed[static_cast<std::size_t>(j)] = true;
    s.bounds.push_back(static_cast<Eigen::Index>(q));
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!fixed[static_cast<std::size_t>(j)]) s.free_cols.push_back(j);
  }
  return s;
}

std::vector<Eigen::Index> rows_of(const std::vector<int>& W, const std::vector<Eigen::Index>& pos) {
  std::vector<Eigen::Index> out;
  out.reserve(pos.size());
  for (Eigen::Index q : pos) out.push_back(W[static_cast<std::size_t>(q)]);
  return out;
}

bool independent(const DenseMatrix& A, const std::vector<int>& W, const std::vector<Eigen::Index>& bound_col) {
  const WorkingSplit s = split_working(W, bound_col, A.cols());
  if (s.duplicate_bound) return false;
  const auto kg = static_cast<Eigen::Index>(s.general.size());
  if (kg == 0) return true;
  if (kg > static_cast<Eigen::Index>(s.free_cols.size())) return false;
  const DenseMatrix GF = A(rows_of(W, s.general), s.free_cols);
  Eigen::ColPivHouseholderQR<DenseMatrix> qr(GF.transpose());
  qr.setThreshold(1e-9);
  return qr.rank() == kg;
}

// Primal active-set method; the working set stays linearly independent.
QpResult active_set_qp(const Polytope& P, const DenseMatrix& Q, const Vector& c, Vector x) {
  const DenseMatrix& A = P.A();
  const Vector& b = P.b();
  const Eigen::Index n = P.dim();
  const Eigen::Index m = P.rows();
  const std::vector<Eigen::Index> bound_col = bound_columns(A);

  std::vector<int> W;
  std::vector<bool> fixed(static_cast<std::size_t>(m), false);  // equality representatives
  std::vector<bool> in_w(static_cast<std::size_t>(m), false);
  const ActiveSet act = active_set(P, x);
  auto try_add = [&](int i, bool is_eq) {
    W.push_back(i);
    if (!independent(A, W, bound_col)) {
      W.pop_back();
      return;
    }
    in_w[static_cast<std::size_t>(i)] = true;
    fixed[static_cast<std::size_t>(i)] = is_eq;
  };
  for (int i : act.indices) {
    const int j = P.partner(i);
    if (j > i) try_add(i, true);
  }
  for (int i : act.indices) {
    if (P.partner(i) < 0) try_add(i, false);
  }

  const int cap = 50 * static_cast<int>(m + n) + 100;
  const double qscale = std::max(Q.lpNorm<Eigen::Infinity>(), 1e-12);
  int it = 0;
  bool subspace_min = false;
  for (; it < cap; ++it) {
    const Vector g = Q * x + c;
    const auto k = static_cast<Eigen::Index>(W.size());
    const WorkingSplit split = split_working(W, bound_col, n);
    const std::vector<Eigen::Index> grows = rows_of(W, split.general);
    const auto nf = static_cast<Eigen::Index>(split.free_cols.size());
    const DenseMatrix GF = A(grows, split.free_cols);
    // Null-space step on the free coordinates: p_F = Z y with
    // Z^T Q_FF Z y = -Z^T g_F, so the working rows stay tight to rounding.
    const DenseMatrix Z = nf > 0 ? linalg::nullspace_basis(GF) : DenseMatrix(0, 0);
    Vector p = Vector::Zero(n);
    bool ray = false;
    if (Z.cols() > 0) {
      const DenseMatrix H = Z.transpose() * Q(split.free_cols, split.free_cols) * Z;
      const Vector gz = Z.transpose() * g(split.free_cols);
      const Vector y = linalg::least_squares(H, -gz);
      Vector pf;
      if ((H * y + gz).norm() > 1e-9 * (1.0 + gz.norm())) {
        // Singular reduced Hessian: descend along its nullspace to a blocking row.
        pf = -(Z * (linalg::pseudoinverse_projector(H) * gz));
        ray = true;
      } else {
        pf = Z * y;
      }
      p(split.free_cols) = pf;
    }

    if (subspace_min || p.norm() <= 1e-12 * (1.0 + x.norm()) + 1e-12 * g.norm() / qscale) {
      subspace_min = false;
      // Multipliers: general rows from the free coordinates, bounds from the rest.
      const Vector resid = -(g + Q * p);
      Vector lam = Vector::Zero(k);
      Vector lg = Vector::Zero(static_cast<Eigen::Index>(grows.size()));
      if (!grows.empty()) {
        lg = nf > 0 ? linalg::least_squares(GF.transpose(), Vector(resid(split.free_cols)))
                    : Vector::Zero(static_cast<Eigen::Index>(grows.size()));
        for (std::size_t q = 0; q < split.general.size(); ++q) lam[split.general[q]] = lg[static_cast<Eigen::Index>(q)];
      }
      for (Eigen::Index q : split.bounds) {
        const int i = W[static_cast<std::size_t>(q)];
        const Eigen::Index j = bound_col[static_cast<std::size_t>(i)];
        double r = resid[j];
        if (!grows.empty()) r -= A(grows, j).dot(lg);
        lam[q] = r / A(i, j);
      }
      int drop = -1;
      const double tol = 1e-10 * (1.0 + g.norm());
      for (Eigen::Index q = 0; q < k; ++q) {
        const int i = W[static_cast<std::size_t>(q)];
        if (fixed[static_cast<std::size_t>(i)] || lam[q] >= -tol) continue;
        if (drop < 0 || i < W[static_cast<std::size_t>(drop)]) drop = static_cast<int>(q);
      }
      if (drop < 0) break;
      in_w[static_cast<std::size_t>(W[static_cast<std::size_t>(drop)])] = false;
      W.erase(W.begin() + drop);
      continue;
    }

    double alpha = ray ? std::numeric_limits<double>::infinity() : 1.0;
    int block = -1;
    const double pn = p.norm();
    for (Eigen::Index i = 0; i < m; ++i) {
      if (in_w[static_cast<std::size_t>(i)]) continue;
      const int j = P.partner(i);
      if (j >= 0 && in_w[static_cast<std::size_t>(j)]) continue;
      const double ap = A.row(i).dot(p);
      if (ap <= 1e-14 * A.row(i).norm() * pn) continue;
      const double ratio = std::max(b[i] - A.row(i).dot(x), 0.0) / ap;
      if (ratio < alpha) {
        alpha = ratio;
        block = static_cast<int>(i);
      }
    }
    if (!std::isfinite(alpha)) throw Error(ErrorCode::Unbounded, "solve_qp: objective unbounded");
    x += alpha * p;
    subspace_min = block < 0 && !ray;
    if (block >= 0) {
      W.push_back(block);
      in_w[static_cast<std::size_t>(block)] = true;
    }
  }
  if (it >= cap) throw Error(ErrorCode::IterationCap, "solve_qp: active-set iteration cap");
  QpResult out;
  out.point = x;
  out.value = 0.5 * x.dot(Q * x) + c.dot(x);
  out.iterations = it;
  return out;
}

Vector feasible_start(const Polytope& P, const Vector* start, const Vector& c) {
  if (start && start->size() == P.dim() && max_violation(P, *start) <= kActiveTol) return *start;
  return lo_oracle(P, c);
}

}  // namespace

QpResult solve_qp(const Polytope& P, const DenseMatrix& Q, const Vector& c, const Vector* start) {
  if (Q.rows() != P.dim() || Q.cols() != P.dim() || c.size() != P.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "solve_qp: dimensions");
  }
  linalg::require_finite(Q, "solve_qp: Q");
  linalg::require_finite(c, "solve_qp: c");
  if (!P.explicit_rows()) {
    if (P.dim() > 12) throw Error(ErrorCode::UnsupportedPolytope, "solve_qp: implicit l1 ball");
    auto [A, b] = P.l1_rows();
    const Polytope explicit_ball = Polytope::generic(A, b);
    return solve_qp(explicit_ball, Q, c, start);
  }
  return active_set_qp(P, Q, c, feasible_start(P, start, c));
}

ProjectionResult project(const Polytope& P, const Vector& y, const Vector* warm_start) {
  if (y.size() != P.dim()) throw Error(ErrorCode::DimensionMismatch, "project: dimension");
  linalg::require_finite(y, "project: y");
  ProjectionResult out;
  if (max_violation(P, y) <= 0.0) {
    out.point = y;
  } else if (P.kind() == PolytopeKind::Box || P.kind() == PolytopeKind::Simplex ||
             P.kind() == PolytopeKind::L1Ball) {
    out.point = closed_form(P, y);
  } else {
    const DenseMatrix I = DenseMatrix::Identity(P.dim(), P.dim());
    QpResult qp = active_set_qp(P, I, -y, feasible_start(P, warm_start, -y));
    out.point = std::move(qp.point);
    out.iterations = qp.iterations;
  }
  const NormalCone cone(P, out.point);
  out.active = cone.active();
  const Vector residual = y - out.point;
  const ConeSplit cs = cone.project(residual);
  if ((residual - cs.normal).norm() > 1e-8 * (1.0 + y.norm())) {
    throw Error(ErrorCode::NumericalStall, "project: optimality certificate failed");
  }
  out.multipliers = cs.multipliers;
  return out;
}

std::vector<Vector> sample_curve(const Polytope& P, const Vector& x0, const Vector& w,
                                 const std::vector<double>& lambdas) {
  if (x0.size() != P.dim() || w.size() != P.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "sample_curve: dimension");
  }
  std::vector<Vector> out;
  out.reserve(lambdas.size());
  Vector warm = x0;
  for (double lambda : lambdas) {
    if (lambda == 0.0) {
      out.push_back(x0);
      continue;
    }
    ProjectionResult r = project(P, x0 - lambda * w, &warm);
    warm = r.point;
    out.push_back(std::move(r.point));
  }
  return out;
}

}  // namespace shadowcg
