#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <limits>
#include <vector>

#include "shadowcg/error.hpp"
#include "shadowcg/polytope.hpp"
#include "shadowcg/rng.hpp"

namespace testsupport {

using shadowcg::DenseMatrix;
using shadowcg::Polytope;
using shadowcg::SplitMix64;
using shadowcg::Vector;

inline Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

inline DenseMatrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  DenseMatrix M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) M(i, j++) = v;
    ++i;
  }
  return M;
}

/// {x >= 0, x1 + x2 <= 1}; rows -x1 <= 0, -x2 <= 0, x1 + x2 <= 1.
/// Componentwise equality up to `tol` (LP outputs carry rounding).
inline bool near_eq(const Vector& a, const Vector& b, double tol = 1e-9) {
  return a.size() == b.size() && (a - b).lpNorm<Eigen::Infinity>() <= tol;
}

inline Polytope triangle() { return Polytope::generic(mat({{-1, 0}, {0, -1}, {1, 1}}), vec({0, 0, 1})); }

inline Polytope unit_box(int n) { return Polytope::box(Vector::Zero(n), Vector::Ones(n)); }

inline Vector gaussian(SplitMix64& rng, Eigen::Index n) {
  Vector v(n);
  for (Eigen::Index j = 0; j < n; ++j) v[j] = rng.normal();
  return v;
}

inline Vector unit(SplitMix64& rng, Eigen::Index n) {
  Vector v = gaussian(rng, n);
  return v / v.norm();
}

/// Random bounded polytope with unit facet normals and the origin inside.
inline Polytope random_polytope(SplitMix64& rng, int n, int m) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    DenseMatrix A(m, n);
    Vector b(m);
    for (int i = 0; i < m; ++i) {
      A.row(i) = unit(rng, n).transpose();
      b[i] = rng.uniform(0.5, 1.5);
    }
    try {
      return Polytope::generic(A, b);
    } catch (const shadowcg::Error& e) {
      if (e.code() != shadowcg::ErrorCode::Unbounded) throw;
    }
  }
  throw shadowcg::Error(shadowcg::ErrorCode::Unbounded, "random_polytope: no bounded draw");
}

/// Dimension and row count drawn from n in {2..6}, m in {max(4, n+1)..12}.
inline Polytope random_small_polytope(SplitMix64& rng) {
  const int n = 2 + static_cast<int>(rng.below(5));
  const int mlo = std::max(4, n + 1);
  const int m = mlo + static_cast<int>(rng.below(static_cast<std::uint64_t>(13 - mlo)));
  return random_polytope(rng, n, m);
}

/// Interior, boundary or vertex point chosen by `kind` (0, 1, 2).
inline Vector random_point(SplitMix64& rng, const Polytope& P, int kind) {
  const Eigen::Index n = P.dim();
  if (kind == 2) return shadowcg::lo_oracle(P, gaussian(rng, n));
  const Vector center = Vector::Zero(n);
  const Vector u = unit(rng, n);
  const double reach = shadowcg::max_step(P, center, u);
  return center + (kind == 1 ? reach : rng.uniform(0.0, 0.9) * reach) * u;
}

/// Vertices of an explicit polytope with n <= 6 by brute force over row subsets.
inline std::vector<Vector> vertices(const Polytope& P) {
  const Eigen::Index n = P.dim();
  const Eigen::Index m = P.rows();
  std::vector<Vector> out;
  std::vector<int> pick(static_cast<std::size_t>(n));
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == n) {
      DenseMatrix M(n, n);
      Vector r(n);
      for (Eigen::Index k = 0; k < n; ++k) {
        M.row(k) = P.A().row(pick[static_cast<std::size_t>(k)]);
        r[k] = P.b()[pick[static_cast<std::size_t>(k)]];
      }
      Eigen::FullPivLU<DenseMatrix> lu(M);
      if (lu.rank() < n) return;
      const Vector x = lu.solve(r);
      if (shadowcg::max_violation(P, x) > 1e-9) return;
      for (const Vector& v : out) {
        if ((v - x).norm() < 1e-9) return;
      }
      out.push_back(x);
      return;
    }
    for (int i = start; i < m; ++i) {
      pick[static_cast<std::size_t>(depth)] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  return out;
}

/// Nearest point of an explicit polytope by enumerating row subsets of size
/// <= n and projecting onto each affine hull; exponential, for n <= 6.
inline Vector brute_project(const Polytope& P, const Vector& y) {
  const Eigen::Index n = P.dim();
  const Eigen::Index m = P.rows();
  Vector best = y;
  double best_dist = std::numeric_limits<double>::infinity();
  if (shadowcg::max_violation(P, y) <= 1e-12) return y;
  std::vector<int> pick;
  std::function<void(int)> rec = [&](int start) {
    if (!pick.empty()) {
      const auto k = static_cast<Eigen::Index>(pick.size());
      DenseMatrix M(k, n);
      Vector r(k);
      for (Eigen::Index i = 0; i < k; ++i) {
        M.row(i) = P.A().row(pick[static_cast<std::size_t>(i)]);
        r[i] = P.b()[pick[static_cast<std::size_t>(i)]];
      }
      // Minimum-norm correction lies in the row space of M.
      const Vector x = y - M.completeOrthogonalDecomposition().solve(M * y - r);
      if ((M * x - r).norm() <= 1e-9 * (1.0 + r.norm()) && shadowcg::max_violation(P, x) <= 1e-12 * (1.0 + y.norm())) {
        const double d = (x - y).norm();
        if (d < best_dist) {
          best_dist = d;
          best = x;
        }
      }
    }
    if (static_cast<Eigen::Index>(pick.size()) == n) return;
    for (int i = start; i < m; ++i) {
      pick.push_back(i);
      rec(i + 1);
      pick.pop_back();
    }
  };
  rec(0);
  return best;
}

}  // namespace testsupport
