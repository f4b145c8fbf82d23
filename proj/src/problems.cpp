#include "shadowcg/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "shadowcg/error.hpp"
#include "shadowcg/rng.hpp"

namespace shadowcg {

QuadraticObjective QuadraticObjective::make(DenseMatrix Q, Vector c, double constant) {
  if (Q.rows() != Q.cols() || Q.rows() != c.size()) {
    throw Error(ErrorCode::DimensionMismatch, "objective: Q must be n x n with len(c) = n");
  }
  linalg::require_finite(Q, "objective: Q");
  linalg::require_finite(c, "objective: c");
  if (!std::isfinite(constant)) throw Error(ErrorCode::NonFiniteInput, "objective: constant");
  const double asym = (Q - Q.transpose()).lpNorm<Eigen::Infinity>();
  if (asym > 1e-12 * (1.0 + Q.lpNorm<Eigen::Infinity>())) {
    throw Error(ErrorCode::InvalidArgument, "objective: Q is not symmetric");
  }
  QuadraticObjective f;
  f.Q = 0.5 * (Q + Q.transpose());
  f.c = std::move(c);
  f.constant = constant;
  if (f.Q.rows() > 0) {
    Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(f.Q, Eigen::EigenvaluesOnly);
    f.mu = std::max(eig.eigenvalues().minCoeff(), 0.0);
    f.L = std::max(eig.eigenvalues().maxCoeff(), 0.0);
  }
  return f;
}

double QuadraticObjective::value(const Vector& x) const {
  if (x.size() != c.size()) throw Error(ErrorCode::DimensionMismatch, "objective: dimension");
  return 0.5 * x.dot(Q * x) + c.dot(x) + constant;
}

std::function<double(double)> QuadraticObjective::along(const Vector& x, const Vector& d) const {
  const double slope = (Q * x + c).dot(d);
  const double curv = d.dot(Q * d);
  return [slope, curv](double t) { return t * slope + 0.5 * t * t * curv; };
}

Vector gradient(const QuadraticObjective& f, const Vector& x) {
  if (x.size() != f.c.size()) throw Error(ErrorCode::DimensionMismatch, "gradient: dimension");
  return f.Q * x + f.c;
}

Instance make_lasso(int rows, int cols, int sparsity, double radius, std::uint64_t seed) {
  if (rows < 1 || cols < 1) throw Error(ErrorCode::InvalidArgument, "lasso: empty shape");
  if (sparsity < 0 || sparsity > cols) throw Error(ErrorCode::InvalidArgument, "lasso: sparsity > cols");
  SplitMix64 rng(seed);
  DenseMatrix M(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) M(i, j) = rng.normal();
  }
  std::vector<int> perm(static_cast<std::size_t>(cols));
  std::iota(perm.begin(), perm.end(), 0);
  for (int k = 0; k < sparsity; ++k) {
    const auto pick = k + static_cast<int>(rng.below(static_cast<std::uint64_t>(cols - k)));
    std::swap(perm[static_cast<std::size_t>(k)], perm[static_cast<std::size_t>(pick)]);
  }
  Vector x_true = Vector::Zero(cols);
  for (int k = 0; k < sparsity; ++k) {
    x_true[perm[static_cast<std::size_t>(k)]] = rng.uniform() < 0.5 ? -1.0 : 1.0;
  }
  Vector b = M * x_true;
  for (int i = 0; i < rows; ++i) b[i] += 0.01 * rng.normal();

  if (radius <= 0.0) radius = sparsity > 0 ? x_true.lpNorm<1>() : 1.0;
  Instance inst{Polytope::l1_ball(cols, radius),
                QuadraticObjective::make(2.0 * M.transpose() * M, -2.0 * M.transpose() * b, b.squaredNorm()),
                Vector::Zero(cols), seed,
                "lasso_" + std::to_string(rows) + "x" + std::to_string(cols) + "_s" + std::to_string(sparsity)};
  inst.x0[0] = radius;
  return inst;
}

FlowGraph layered_dag(int n_layers, int width) {
  if (n_layers < 1 || width < 1) throw Error(ErrorCode::InvalidArgument, "layered_dag: empty shape");
  FlowGraph g;
  g.nodes = 2 + n_layers * width;
  g.source = 0;
  g.sink = g.nodes - 1;
  auto node = [width](int layer, int k) { return 1 + layer * width + k; };
  for (int k = 0; k < width; ++k) g.edges.emplace_back(g.source, node(0, k));
  for (int layer = 0; layer + 1 < n_layers; ++layer) {
    for (int a = 0; a < width; ++a) {
      for (int c = 0; c < width; ++c) g.edges.emplace_back(node(layer, a), node(layer + 1, c));
    }
  }
  for (int k = 0; k < width; ++k) g.edges.emplace_back(node(n_layers - 1, k), g.sink);
  return g;
}

Instance make_flow_quadratic(int n_layers, int width, std::uint64_t seed) {
  Polytope P = make_flow_polytope(layered_dag(n_layers, width));
  const Eigen::Index n = P.dim();
  SplitMix64 rng(seed);
  DenseMatrix G(n, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) G(i, j) = scale * rng.normal();
  }
  Vector c(n);
  for (Eigen::Index j = 0; j < n; ++j) c[j] = rng.normal();
  Vector dir(n);
  for (Eigen::Index j = 0; j < n; ++j) dir[j] = rng.normal();
  DenseMatrix Q = G.transpose() * G + 0.1 * DenseMatrix::Identity(n, n);
  Q = 0.5 * (Q + Q.transpose());
  Vector x0 = lo_oracle(P, dir);
  return Instance{std::move(P), QuadraticObjective::make(std::move(Q), std::move(c)), std::move(x0), seed,
                  "flow_" + std::to_string(n_layers) + "x" + std::to_string(width)};
}

}  // namespace shadowcg
