#include <doctest.h>

#include "shadowcg/error.hpp"
#include "shadowcg/line_search.hpp"
#include "shadowcg/problems.hpp"
#include "shadowcg/rng.hpp"
#include "support.hpp"

using namespace shadowcg;
using testsupport::gaussian;
using testsupport::vec;

TEST_CASE("gradient examples") {
  auto f = QuadraticObjective::make(DenseMatrix::Identity(2, 2), vec({-2, -2}));
  CHECK(gradient(f, vec({0, 0})) == vec({-2, -2}));
  f = QuadraticObjective::make(DenseMatrix::Zero(2, 2), vec({1, 0}));
  CHECK(gradient(f, vec({5, -3})) == vec({1, 0}));
  f = QuadraticObjective::make(DenseMatrix(vec({2, 4}).asDiagonal()), vec({0, 0}));
  CHECK(gradient(f, vec({1, 1})) == vec({2, 4}));
  CHECK_THROWS_AS(gradient(f, vec({1})), Error);
}

TEST_CASE("objective validation") {
  DenseMatrix Q(2, 2);
  Q << 1, 2, 0, 1;
  CHECK_THROWS_AS(QuadraticObjective::make(Q, vec({0, 0})), Error);
  CHECK_THROWS_AS(QuadraticObjective::make(DenseMatrix::Identity(2, 2), vec({0})), Error);
}

TEST_CASE("mu and L bound the curvature") {
  SplitMix64 rng(71);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.below(6));
    DenseMatrix G(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) G(i, j) = rng.normal();
    const auto f = QuadraticObjective::make(G.transpose() * G + 0.1 * DenseMatrix::Identity(n, n), gaussian(rng, n));
    CHECK(f.mu >= 0.1 - 1e-9);
    for (int k = 0; k < 10; ++k) {
      const Vector d = gaussian(rng, n);
      const double q = d.dot(f.Q * d);
      CHECK(f.mu * d.squaredNorm() <= q + 1e-8);
      CHECK(q <= f.L * d.squaredNorm() + 1e-8);
    }
  }
}

TEST_CASE("along matches value differences") {
  SplitMix64 rng(72);
  const auto f = QuadraticObjective::make(DenseMatrix::Identity(3, 3) * 2.0, vec({1, -1, 0.5}), 3.0);
  const Vector x = gaussian(rng, 3), d = gaussian(rng, 3);
  const auto phi = f.along(x, d);
  for (double t : {0.0, 0.3, 1.7}) CHECK(phi(t) == doctest::Approx(f.value(x + t * d) - f.value(x)));
}

TEST_CASE("lasso instance shape") {
  const Instance a = make_lasso(20, 40, 10, 0.0, 1);
  CHECK(a.polytope.kind() == PolytopeKind::L1Ball);
  CHECK(a.polytope.dim() == 40);
  CHECK(a.polytope.radius() == doctest::Approx(10.0));
  CHECK(a.x0[0] == a.polytope.radius());
  CHECK(a.x0.tail(39).norm() == 0.0);
  const Instance b = make_lasso(20, 40, 10, 0.0, 1);
  CHECK(a.objective.Q == b.objective.Q);
  CHECK(a.objective.c == b.objective.c);
  CHECK_FALSE(make_lasso(20, 40, 10, 0.0, 2).objective.c == a.objective.c);
  // Desk-scale instance.
  CHECK(make_lasso(50, 100, 25, 25.0, 3).polytope.radius() == 25.0);
  CHECK_THROWS_AS(make_lasso(5, 4, 5, 0.0, 1), Error);
}

TEST_CASE("lasso without signal shrinks toward the origin") {
  const Instance inst = make_lasso(10, 8, 0, 1.0, 4);
  // b is pure noise, so the unconstrained optimum is tiny.
  const Vector xls = inst.objective.Q.ldlt().solve(-inst.objective.c);
  CHECK(xls.norm() < 0.05);
}

TEST_CASE("flow instance shape") {
  const Instance a = make_flow_quadratic(3, 4, 5);
  CHECK(a.polytope.dim() == 4 + 2 * 16 + 4);
  CHECK(a.polytope.flow()->nodes == 2 + 3 * 4);
  CHECK(max_violation(a.polytope, a.x0) <= 1e-12);
  CHECK(a.objective.mu >= 0.1 - 1e-9);
  const Instance p = make_flow_quadratic(4, 1, 5);
  CHECK(p.polytope.dim() == 5);
  CHECK(p.x0 == Vector::Ones(5));
}

TEST_CASE("splitmix reference stream") {
  SplitMix64 rng(0);
  CHECK(rng.next() == 0xE220A8397B1DCDAFULL);
  SplitMix64 a(99), b(99);
  for (int k = 0; k < 100; ++k) CHECK(a.normal() == b.normal());
  SplitMix64 u(5);
  for (int k = 0; k < 1000; ++k) {
    const double v = u.uniform();
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("golden_section examples") {
  const double g = golden_section([](double t) { return (t - 0.3) * (t - 0.3); }, 0.0, 1.0, 1e-10);
  CHECK(std::abs(g - 0.3) <= 1e-9);
  CHECK(golden_section([](double t) { return -t; }, 0.0, 1.0) == 1.0);
  CHECK(golden_section([](double t) { return t; }, 0.0, 1.0) == 0.0);
  CHECK(golden_section([](double t) { return t * t; }, 2.0, 2.0) == 2.0);
}

TEST_CASE("golden_section on random convex quadratics") {
  SplitMix64 rng(73);
  for (int k = 0; k < 200; ++k) {
    const double a = rng.uniform(0.01, 10.0), m = rng.uniform(-1.0, 3.0), hi = rng.uniform(0.5, 2.0);
    const double g = golden_section([&](double t) { return a * (t - m) * (t - m); }, 0.0, hi, 1e-10);
    CHECK(std::abs(g - std::clamp(m, 0.0, hi)) <= 1e-9 * (1.0 + hi));
  }
}
