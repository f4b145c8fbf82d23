#include <doctest.h>

#include "shadowcg/error.hpp"
#include "shadowcg/linalg.hpp"
#include "support.hpp"

using namespace shadowcg;
using testsupport::gaussian;
using testsupport::mat;
using testsupport::vec;

namespace {

DenseMatrix uniform_matrix(SplitMix64& rng, Eigen::Index r, Eigen::Index c) {
  DenseMatrix M(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) M(i, j) = rng.uniform(-1.0, 1.0);
  return M;
}

}  // namespace

TEST_CASE("least_squares examples") {
  CHECK((linalg::least_squares(mat({{1, 0}, {0, 1}}), vec({3, 4})) - vec({3, 4})).norm() < 1e-14);
  CHECK((linalg::least_squares(mat({{1}, {1}}), vec({0, 2})) - vec({1})).norm() < 1e-14);
  CHECK((linalg::least_squares(mat({{1, 1}}), vec({2})) - vec({1, 1})).norm() < 1e-14);
}

TEST_CASE("least_squares rejects non-finite input") {
  DenseMatrix M = mat({{1, 0}, {0, 1}});
  M(0, 1) = std::nan("");
  CHECK_THROWS_AS(linalg::least_squares(M, vec({1, 1})), Error);
  CHECK_THROWS_AS(linalg::least_squares(mat({{1}}), vec({INFINITY})), Error);
}

TEST_CASE("least_squares residual is orthogonal to the range") {
  SplitMix64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index r = 1 + static_cast<Eigen::Index>(rng.below(8));
    const Eigen::Index c = 1 + static_cast<Eigen::Index>(rng.below(8));
    DenseMatrix M = uniform_matrix(rng, r, c);
    if (trial % 4 == 0 && c > 1) M.col(0) = M.col(1);  // rank deficient
    const Vector rhs = gaussian(rng, r);
    const Vector y = linalg::least_squares(M, rhs);
    CHECK((M.transpose() * (M * y - rhs)).norm() <= 1e-8);
  }
}

TEST_CASE("pseudoinverse_projector examples") {
  DenseMatrix P = linalg::pseudoinverse_projector(mat({{1, 1}}));
  CHECK((P - 0.5 * mat({{1, -1}, {-1, 1}})).norm() < 1e-12);
  CHECK(linalg::pseudoinverse_projector(mat({{1, 0}, {0, 1}})).norm() < 1e-12);
  P = linalg::pseudoinverse_projector(mat({{1, 0, 0}}));
  CHECK((P - DenseMatrix(vec({0, 1, 1}).asDiagonal())).norm() < 1e-12);
}

TEST_CASE("pseudoinverse_projector is an idempotent nullspace projector") {
  SplitMix64 rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index r = 1 + static_cast<Eigen::Index>(rng.below(6));
    const Eigen::Index c = 1 + static_cast<Eigen::Index>(rng.below(6));
    DenseMatrix M = uniform_matrix(rng, r, c);
    if (trial % 3 == 0 && r > 1) M.row(0) = 2.0 * M.row(1);
    const DenseMatrix P = linalg::pseudoinverse_projector(M);
    CHECK((P * P - P).norm() <= 1e-8);
    CHECK((M * P).norm() <= 1e-8);
    CHECK((P - P.transpose()).norm() <= 1e-9);
  }
}

TEST_CASE("nnls examples") {
  auto r = linalg::nnls(mat({{1, 1}}), vec({0, 1}));
  CHECK(r.mu[0] == doctest::Approx(0.5));
  CHECK((r.residual - vec({-0.5, 0.5})).norm() < 1e-12);

  r = linalg::nnls(mat({{1, 0}}), vec({-1, 0}));
  CHECK(r.mu[0] == 0.0);
  CHECK((r.residual - vec({-1, 0})).norm() < 1e-12);

  r = linalg::nnls(mat({{1, 0}, {0, 1}}), vec({2, 3}));
  CHECK((r.mu - vec({2, 3})).norm() < 1e-12);
  CHECK(r.residual.norm() < 1e-12);
}

TEST_CASE("nnls satisfies KKT and beats random feasible multipliers") {
  SplitMix64 rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index k = 1 + static_cast<Eigen::Index>(rng.below(10));
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.below(6));
    const DenseMatrix M = uniform_matrix(rng, k, n);
    const Vector rhs = gaussian(rng, n);
    const auto r = linalg::nnls(M, rhs);
    const double tol = linalg::nnls_tolerance(rhs);
    CHECK(r.mu.minCoeff() >= -1e-12);
    CHECK((r.residual - (rhs - M.transpose() * r.mu)).norm() <= 1e-10);
    const Vector slope = M * r.residual;
    for (Eigen::Index i = 0; i < k; ++i) {
      CHECK(slope[i] <= tol);
      if (r.mu[i] > 1e-12) CHECK(std::abs(slope[i]) <= tol);
    }
    for (int s = 0; s < 20; ++s) {
      Vector mu(k);
      for (Eigen::Index i = 0; i < k; ++i) mu[i] = rng.uniform() < 0.3 ? 0.0 : rng.uniform(0.0, 2.0);
      CHECK(r.residual.norm() <= (rhs - M.transpose() * mu).norm() + 1e-12);
    }
  }
}
