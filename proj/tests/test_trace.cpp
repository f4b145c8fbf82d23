#include <doctest.h>

#include <sstream>

#include "curve_checks.hpp"
#include "shadowcg/error.hpp"
#include "shadowcg/problems.hpp"
#include "shadowcg/trace.hpp"

using namespace shadowcg;
using testsupport::triangle;
using testsupport::unit_box;
using testsupport::vec;

TEST_CASE("trace_step examples") {
  const Polytope T = triangle();
  Breakpoint bp = trace_step(T, vec({0.2, 0.2}), vec({0, 1}), vec({0.2, 0.2}), 0.0);
  CHECK(bp.step_kind == StepKind::ShadowStep);
  CHECK((bp.end_point() - vec({0.2, 0.0})).norm() < 1e-12);
  CHECK(bp.end_lambda() == doctest::Approx(0.2));

  bp = trace_step(T, vec({0.2, 0.2}), vec({0, 1}), vec({0.2, 0.0}), 0.2);
  CHECK(bp.step_kind == StepKind::Endpoint);
  CHECK(std::isinf(bp.lambda_plus));

  bp = trace_step(unit_box(2), vec({0, 0}), vec({-2, -2}), vec({0, 0}), 0.0);
  CHECK(bp.step_kind == StepKind::ShadowStep);
  CHECK((bp.end_point() - vec({1, 1})).norm() < 1e-12);
  CHECK(bp.end_lambda() == doctest::Approx(0.5));
}

TEST_CASE("trace_step rejects points off the curve") {
  try {
    trace_step(triangle(), vec({0.2, 0.2}), vec({0, 1}), vec({0.3, 0.2}), 0.0);
    FAIL("expected OffCurve");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OffCurve);
  }
}

TEST_CASE("trace_in_face: curve slides along a facet and leaves it early") {
  // x = (0.5, 0) on the facet x2 >= 0, p = (0, -0.2); -w = (1, 1).
  const Polytope T = triangle();
  const Vector x0 = vec({0.5, -0.2});
  const Vector w = vec({-1, -1});
  const Vector x = vec({0.5, 0.0});
  const InFaceMove mv = trace_in_face(T, x0, w, x, 0.0);
  CHECK((mv.direction - vec({1, 0})).norm() < 1e-12);
  CHECK(mv.lambda_hat == doctest::Approx(0.2));
  CHECK(mv.lambda_hat < max_step(T, x, mv.direction));
  // The facet is still tight just before lambda_hat and released just after.
  const auto g = sample_curve(T, x0, w, {0.2 - 1e-4, 0.2 + 1e-4});
  CHECK(active_set(T, g[0]).indices == std::vector<int>{1});
  CHECK(active_set(T, g[1]).indices.empty());
}

TEST_CASE("trace_in_face: optimality holds at the far end of the face") {
  const Polytope T = triangle();
  const Vector x0 = vec({0.5, -0.8});
  const Vector w = vec({-1, -1});
  const Vector x = vec({0.5, 0.0});
  const InFaceMove mv = trace_in_face(T, x0, w, x, 0.0);
  CHECK(mv.lambda_hat == doctest::Approx(0.5));
  const Vector far = x + 0.5 * mv.direction;
  CHECK(normal_cone_member(T, far, x0 - 0.5 * w - far));
}

TEST_CASE("trace_in_face: stall at a vertex") {
  // At (1, 0) with p = (0.5, -0.5) and -w = (0, 1) the curve rests until lambda = 1.
  const Polytope T = triangle();
  const Vector x0 = vec({1.5, -0.5});
  const Vector w = vec({0, -1});
  const Vector x = vec({1.0, 0.0});
  const InFaceMove mv = trace_in_face(T, x0, w, x, 0.0);
  CHECK(mv.direction.norm() == 0.0);
  CHECK(mv.lambda_hat == doctest::Approx(1.0));
  const auto g = sample_curve(T, x0, w, {0.25, 0.99, 1.1});
  CHECK((g[0] - x).norm() < 1e-12);
  CHECK((g[1] - x).norm() < 1e-12);
  CHECK((g[2] - x).norm() > 1e-3);

  const Breakpoint bp = trace_step(T, x0, w, x, 0.0);
  CHECK(bp.step_kind == StepKind::InFaceStep);
  CHECK(bp.lambda_plus == doctest::Approx(1.0));
}

TEST_CASE("trace_curve examples") {
  const Polytope T = triangle();
  ProjectionCurve c = trace_curve(T, vec({0.2, 0.2}), vec({0, 1}));
  REQUIRE(c.breakpoints.size() == 2);
  CHECK(c.breakpoints[0].point == vec({0.2, 0.2}));
  CHECK((c.breakpoints[1].point - vec({0.2, 0.0})).norm() < 1e-12);
  CHECK(c.breakpoints[1].step_kind == StepKind::Endpoint);

  c = trace_curve(T, vec({0.5, 0.5}), vec({-1, -1}));
  REQUIRE(c.breakpoints.size() == 1);
  CHECK(c.breakpoints[0].step_kind == StepKind::Endpoint);

  c = trace_curve(unit_box(2), vec({0, 0}), vec({-2, -2}));
  REQUIRE(c.breakpoints.size() == 2);
  CHECK((c.breakpoints[1].point - vec({1, 1})).norm() < 1e-12);
}

TEST_CASE("curve csv") {
  const ProjectionCurve c = trace_curve(triangle(), vec({0.2, 0.2}), vec({0, 1}));
  std::ostringstream out;
  write_curve_csv(out, c);
  CHECK(out.str() ==
        "index,lambda_minus,lambda_plus,step_kind,x1,x2\n"
        "0,0,0,shadow,0.20000000000000001,0.20000000000000001\n"
        "1,0.20000000000000001,inf,endpoint,0.20000000000000001,0\n");
}

TEST_CASE("traced curves match sampled projections") {
  SplitMix64 rng(61);
  for (int trial = 0; trial < 25; ++trial) {
    const auto k = testsupport::random_curve_case(rng);
    const ProjectionCurve c = trace_curve(k.P, k.x0, k.w);
    CHECK(testsupport::reconstruction_error(k, c, 60) <= 1e-6);
    const auto e = testsupport::endpoint_report(k, c);
    CHECK(e.value_error <= 1e-7);
    CHECK(e.face_distance_error <= 1e-6);
    std::string why;
    CHECK_MESSAGE(testsupport::structure_violations(k, c, &why) == 0, why);
  }
}

TEST_CASE("traced curves on structured polytopes") {
  SplitMix64 rng(62);
  const Polytope box = Polytope::box(vec({-1, 0, 0}), vec({1, 2, 0.5}));
  const Polytope simplex = Polytope::simplex(4);
  const Polytope l1 = Polytope::l1_ball(3, 1.0);
  const Polytope flow = make_flow_polytope(layered_dag(2, 2));
  for (const Polytope* P : {&box, &simplex, &l1, &flow}) {
    for (int k = 0; k < 5; ++k) {
      const Vector x0 = project(*P, testsupport::gaussian(rng, P->dim())).point;
      const Vector w = testsupport::gaussian(rng, P->dim());
      const ProjectionCurve c = trace_curve(*P, x0, w);
      const Vector end = c.breakpoints.back().point;
      CHECK(w.dot(end) == doctest::Approx(w.dot(lo_oracle(*P, w))).epsilon(1e-9));
      double worst = 0.0;
      for (int i = 0; i <= 40; ++i) {
        const double l = (1.5 * testsupport::final_lambda(c) + 1.0) * i / 40.0;
        worst = std::max(worst, (project(*P, x0 - l * w).point - c.at(l)).norm());
      }
      CHECK(worst <= 1e-6);
    }
  }
}

TEST_CASE("trace_opt examples") {
  const Polytope box = unit_box(2);
  auto f = QuadraticObjective::make(DenseMatrix::Identity(2, 2), vec({-2, -2}));
  TraceOptResult r = trace_opt(box, f, vec({0, 0}));
  CHECK((r.point - vec({1, 1})).norm() < 1e-9);
  CHECK(r.segments == 1);

  f = QuadraticObjective::make(DenseMatrix::Identity(2, 2), vec({-0.5, -0.2}));
  r = trace_opt(box, f, vec({0, 0}));
  CHECK((r.point - vec({0.5, 0.2})).norm() < 1e-8);
  CHECK(r.segments == 1);
  CHECK_FALSE(r.endpoint);
}

TEST_CASE("trace_opt beats the projected gradient step") {
  const Instance inst = make_lasso(20, 40, 10, 0.0, 1);
  const auto& f = inst.objective;
  const Polytope& P = inst.polytope;
  SplitMix64 rng(63);
  Vector x = inst.x0;
  for (int k = 0; k < 15; ++k) {
    const TraceOptResult r = trace_opt(P, f, x);
    const Vector pg = project(P, x - gradient(f, x) / f.L).point;
    CHECK(f.value(r.point) <= f.value(pg) + 1e-9 * (1.0 + std::abs(f.value(pg))));
    x = r.point;
  }
}
