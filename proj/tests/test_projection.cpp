#include <doctest.h>

#include "shadowcg/problems.hpp"
#include "shadowcg/projection.hpp"
#include "support.hpp"

using namespace shadowcg;
using testsupport::gaussian;
using testsupport::triangle;
using testsupport::unit_box;
using testsupport::vec;

TEST_CASE("project examples") {
  CHECK(project(unit_box(2), vec({1.5, 0.3})).point.isApprox(vec({1, 0.3})));
  CHECK((project(Polytope::l1_ball(2, 1.0), vec({1, 1})).point - vec({0.5, 0.5})).norm() < 1e-12);
  CHECK((project(triangle(), vec({1, 1})).point - vec({0.5, 0.5})).norm() < 1e-12);
}

TEST_CASE("project agrees with face enumeration") {
  SplitMix64 rng(41);
  for (int trial = 0; trial < 150; ++trial) {
    const Polytope P = testsupport::random_small_polytope(rng);
    const Vector y = 2.0 * gaussian(rng, P.dim());
    const auto r = project(P, y);
    CHECK((r.point - testsupport::brute_project(P, y)).norm() <= 1e-8);
    CHECK(normal_cone_member(P, r.point, y - r.point));
  }
}

TEST_CASE("closed-form projections agree with the generic QP") {
  SplitMix64 rng(42);
  const Polytope box = Polytope::box(vec({-1, 0, 0.5}), vec({1, 2, 0.75}));
  const Polytope simplex = Polytope::simplex(4);
  const Polytope l1 = Polytope::l1_ball(3, 1.3);
  auto [l1A, l1b] = l1.l1_rows();
  const std::pair<const Polytope*, Polytope> cases[] = {
      {&box, Polytope::generic(box.A(), box.b())},
      {&simplex, Polytope::generic(simplex.A(), simplex.b())},
      {&l1, Polytope::generic(l1A, l1b)},
  };
  for (const auto& [structured, generic] : cases) {
    for (int k = 0; k < 50; ++k) {
      const Vector y = 2.0 * gaussian(rng, structured->dim());
      CHECK((project(*structured, y).point - project(generic, y).point).norm() <= 1e-9);
    }
  }
}

TEST_CASE("projection is non-expansive, idempotent and certified") {
  SplitMix64 rng(43);
  for (int trial = 0; trial < 100; ++trial) {
    const Polytope P = testsupport::random_small_polytope(rng);
    const Vector y = 2.0 * gaussian(rng, P.dim());
    const Vector y2 = 2.0 * gaussian(rng, P.dim());
    const Vector x = project(P, y).point;
    const Vector x2 = project(P, y2).point;
    CHECK((x - x2).norm() <= (y - y2).norm() + 1e-8);
    CHECK((project(P, x).point - x).norm() <= 1e-9);
    for (const Vector& z : testsupport::vertices(P)) CHECK((y - x).dot(z - x) <= 1e-8);
  }
}

TEST_CASE("projection multipliers certify y - x") {
  SplitMix64 rng(44);
  for (int trial = 0; trial < 50; ++trial) {
    const Polytope P = testsupport::random_small_polytope(rng);
    const Vector y = 3.0 * gaussian(rng, P.dim());
    const auto r = project(P, y);
    DenseMatrix AI(static_cast<Eigen::Index>(r.active.indices.size()), P.dim());
    for (std::size_t k = 0; k < r.active.indices.size(); ++k) AI.row(static_cast<Eigen::Index>(k)) = P.A().row(r.active.indices[k]);
    REQUIRE(r.multipliers.size() == AI.rows());
    if (r.multipliers.size() > 0) CHECK(r.multipliers.minCoeff() >= -1e-12);
    CHECK((y - r.point - AI.transpose() * r.multipliers).norm() <= 1e-7 * (1.0 + y.norm()));
  }
}

TEST_CASE("projection onto a flow polytope") {
  const Polytope P = make_flow_polytope(layered_dag(2, 3));
  SplitMix64 rng(45);
  for (int k = 0; k < 10; ++k) {
    const Vector y = gaussian(rng, P.dim());
    const auto r = project(P, y);
    CHECK(max_violation(P, r.point) <= 1e-9);
    CHECK(normal_cone_member(P, r.point, y - r.point));
  }
}

TEST_CASE("solve_qp reaches the face-enumeration optimum of a projection") {
  SplitMix64 rng(46);
  for (int trial = 0; trial < 30; ++trial) {
    const Polytope P = testsupport::random_small_polytope(rng);
    const Vector y = 2.0 * gaussian(rng, P.dim());
    const auto r = solve_qp(P, DenseMatrix::Identity(P.dim(), P.dim()), -y);
    CHECK((r.point - testsupport::brute_project(P, y)).norm() <= 1e-8);
  }
}

TEST_CASE("sample_curve examples") {
  const auto g = sample_curve(triangle(), vec({0.2, 0.2}), vec({0, 1}), {0.0, 0.1, 0.2, 5.0});
  REQUIRE(g.size() == 4);
  CHECK(g[0] == vec({0.2, 0.2}));
  CHECK((g[1] - vec({0.2, 0.1})).norm() < 1e-12);
  CHECK((g[2] - vec({0.2, 0.0})).norm() < 1e-12);
  CHECK((g[3] - vec({0.2, 0.0})).norm() < 1e-12);

  // -w in the normal cone: the curve never moves.
  const auto h = sample_curve(triangle(), vec({0.5, 0.5}), vec({-1, -1}), {0.0, 0.3, 7.0});
  for (const Vector& x : h) CHECK((x - vec({0.5, 0.5})).norm() < 1e-12);
}

TEST_CASE("sample_curve is Lipschitz in lambda") {
  SplitMix64 rng(47);
  for (int trial = 0; trial < 30; ++trial) {
    const Polytope P = testsupport::random_small_polytope(rng);
    const Vector x0 = testsupport::random_point(rng, P, 0);
    const Vector w = gaussian(rng, P.dim());
    std::vector<double> lam;
    for (int k = 0; k <= 40; ++k) lam.push_back(0.1 * k);
    const auto g = sample_curve(P, x0, w, lam);
    CHECK(g[0] == x0);
    for (std::size_t k = 1; k < g.size(); ++k) CHECK((g[k] - g[k - 1]).norm() <= 0.1 * w.norm() + 1e-8);
  }
}
