#include "shadowcg/trace.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "shadowcg/error.hpp"
#include "shadowcg/format.hpp"
#include "shadowcg/line_search.hpp"
#include "shadowcg/log.hpp"
#include "shadowcg/projection.hpp"
#include "shadowcg/shadow.hpp"

namespace shadowcg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

InFaceMove in_face_move(const Polytope& P, const NormalCone& cone, const Vector& x0, const Vector& w,
                        const Vector& x, double lambda_x, const Vector& p) {
  const Eigen::Index n = x.size();
  const Vector d = cone.critical_direction(-w, p);
  if (d.norm() <= 1e-12 * (1.0 + w.norm())) {
    // The curve rests at x; find where p - t w leaves the normal cone.
    const double cap = 1e6 * (1.0 + lambda_x);
    const double t = cone.stable_length(p, -w, Vector::Zero(n), cap);
    if (t >= cap * (1.0 - 1e-12)) {
      log_message(LogLevel::Info, "trace: stall reached the parameter cap; treating x as the endpoint");
      return {Vector::Zero(n), kInf};
    }
    return {Vector::Zero(n), lambda_x + t};
  }
  const double gmax = max_step(P, x, d);
  if (gmax > 0.0) {
    // First-order optimality at the far end, with the cone of the open segment.
    const Vector far = x + gmax * d;
    const Vector p_far = x0 - (lambda_x + gmax) * w - far;
    if (NormalCone(P, x + 0.5 * gmax * d).contains(p_far)) return {d, lambda_x + gmax};
  }
  const double t = cone.stable_length(p, -(w + d), d, gmax);
  return {d, lambda_x + t};
}

Breakpoint step(const Polytope& P, const Vector& x0, const Vector& w, const Vector& x, double lambda_x) {
  const Eigen::Index n = x.size();
  const NormalCone cone(P, x);
  const ConeProjection cp = shadow(cone, w);
  const Vector p = x0 - lambda_x * w - x;

  Breakpoint bp;
  bp.point = x;
  bp.lambda_minus = lambda_x;
  bp.lambda_plus = lambda_x;
  bp.active = cone.active();
  bp.normal_vector = p;
  bp.segment_direction = Vector::Zero(n);

  if (is_stationary(cp)) {
    bp.step_kind = StepKind::Endpoint;
    bp.lambda_plus = kInf;
    return bp;
  }
  const Vector& d = cp.shadow;
  if (std::abs(p.dot(d)) <= 1e-8 * (1.0 + p.norm() * d.norm())) {
    bp.step_kind = StepKind::ShadowStep;
    bp.segment_direction = d;
    bp.segment_length = max_step(P, x, d);
    return bp;
  }
  const InFaceMove mv = in_face_move(P, cone, x0, w, x, lambda_x, p);
  if (!std::isfinite(mv.lambda_hat)) {
    bp.step_kind = StepKind::Endpoint;
    bp.lambda_plus = kInf;
    return bp;
  }
  bp.step_kind = StepKind::InFaceStep;
  if (mv.direction.squaredNorm() == 0.0) {
    bp.lambda_plus = mv.lambda_hat;
    bp.normal_vector = x0 - mv.lambda_hat * w - x;
    return bp;
  }
  bp.segment_direction = mv.direction;
  bp.segment_length = mv.lambda_hat - lambda_x;
  return bp;
}

// Pulls a point reached by accumulated steps back onto the curve: moves x by
// the tangent part of its residual so x0 - lambda w - x lies in N_P(x) again.
Vector snap(const Polytope& P, const Vector& x0, const Vector& w, const Vector& x, double lambda) {
  const NormalCone cone(P, x);
  if (cone.trivial()) return x;
  const Vector p = x0 - lambda * w - x;
  const Vector r = p - cone.project(p).normal;
  const double rn = r.norm();
  if (rn == 0.0 || rn > 1e-6 * (1.0 + p.norm())) return x;
  return x + std::min(1.0, max_step(P, x, r)) * r;
}

bool is_stall(const Breakpoint& bp) {
  return bp.step_kind == StepKind::InFaceStep && bp.segment_direction.squaredNorm() == 0.0;
}

void check_inputs(const Polytope& P, const Vector& x0, const Vector& w, const char* what) {
  if (x0.size() != P.dim() || w.size() != P.dim()) throw Error(ErrorCode::DimensionMismatch, what);
  linalg::require_finite(x0, what);
  linalg::require_finite(w, what);
}


}  // namespace

const char* to_string(StepKind kind) {
  switch (kind) {
    case StepKind::ShadowStep: return "shadow";
    case StepKind::InFaceStep: return "inface";
    case StepKind::Endpoint: return "endpoint";
  }
  return "endpoint";
}

Vector ProjectionCurve::at(double lambda) const {
  for (const Breakpoint& bp : breakpoints) {
    if (lambda <= bp.lambda_plus || bp.step_kind == StepKind::Endpoint) return bp.point;
    if (lambda <= bp.end_lambda()) return bp.point + (lambda - bp.lambda_plus) * bp.segment_direction;
  }
  return breakpoints.empty() ? origin : breakpoints.back().end_point();
}

void check_on_curve(const Polytope& P, const Vector& x0, const Vector& w, const Vector& x,
                    double lambda_x) {
  const ProjectionResult pr = project(P, x0 - lambda_x * w, &x);
  if ((pr.point - x).norm() > 1e-7 * (1.0 + x.norm())) {
    throw Error(ErrorCode::OffCurve, "trace: x is not g(lambda_x)");
  }
}

Breakpoint trace_step(const Polytope& P, const Vector& x0, const Vector& w, const Vector& x,
                      double lambda_x) {
  check_inputs(P, x0, w, "trace_step: inputs");
  if (x.size() != P.dim()) throw Error(ErrorCode::DimensionMismatch, "trace_step: x");
  check_on_curve(P, x0, w, x, lambda_x);
  return step(P, x0, w, x, lambda_x);
}

InFaceMove trace_in_face(const Polytope& P, const Vector& x0, const Vector& w, const Vector& x,
                         double lambda_x) {
  check_inputs(P, x0, w, "trace_in_face: inputs");
  if (x.size() != P.dim()) throw Error(ErrorCode::DimensionMismatch, "trace_in_face: x");
  const NormalCone cone(P, x);
  return in_face_move(P, cone, x0, w, x, lambda_x, x0 - lambda_x * w - x);
}

ProjectionCurve trace_curve(const Polytope& P, const Vector& x0, const Vector& w) {
  check_inputs(P, x0, w, "trace_curve: inputs");
  (void)active_set(P, x0);
  ProjectionCurve curve;
  curve.origin = x0;
  curve.direction = w;
  const Eigen::Index m = P.explicit_rows() ? P.rows() : std::numeric_limits<Eigen::Index>::max();
  const int cap = m >= 14 ? 10000 : std::min(10000, 1 << static_cast<int>(m));

  Vector x = x0;
  double lambda = 0.0;
  double held_since = 0.0;
  for (int steps = 0; steps < cap; ++steps) {
    Breakpoint bp = step(P, x0, w, x, lambda);
    if (is_stall(bp)) {
      if (!(bp.lambda_plus > lambda)) {
        throw Error(ErrorCode::CapExceeded, "trace_curve: stall without progress");
      }
      lambda = bp.lambda_plus;
      continue;
    }
    bp.lambda_minus = held_since;
    if (bp.step_kind != StepKind::Endpoint && !(bp.segment_length > 0.0)) {
      throw Error(ErrorCode::CapExceeded, "trace_curve: zero-length segment");
    }
    curve.breakpoints.push_back(bp);
    if (bp.step_kind == StepKind::Endpoint) return curve;
    lambda = bp.end_lambda();
    x = snap(P, x0, w, bp.end_point(), lambda);
    held_since = lambda;
  }
  throw Error(ErrorCode::CapExceeded, "trace_curve: breakpoint cap reached");
}

TraceOptResult trace_opt(const Polytope& P, const QuadraticObjective& f, const Vector& x,
                         const TraceOptOptions& opts) {
  if (x.size() != P.dim()) throw Error(ErrorCode::DimensionMismatch, "trace_opt: dimension");
  const Vector w = gradient(f, x);
  const double one_over_L = f.L > 0.0 ? 1.0 / f.L : kInf;
  TraceOptResult out;
  Vector cur = x;
  double lambda = 0.0;
  for (int guard = 0; guard < 10000; ++guard) {
    const Breakpoint bp = step(P, x, w, cur, lambda);
    ++out.shadow_calls;
    if (bp.step_kind == StepKind::Endpoint) {
      out.endpoint = true;
      break;
    }
    if (bp.step_kind == StepKind::InFaceStep) ++out.in_face_steps;
    if (is_stall(bp)) {
      lambda = bp.lambda_plus;
      if (opts.use_L_early_exit && lambda >= one_over_L) break;
      continue;
    }
    const Vector& d = bp.segment_direction;
    const double len = bp.segment_length;
    if (!(len > 0.0)) break;
    ++out.segments;
    const double gamma = golden_section(f.along(cur, d), 0.0, len,
                                        opts.line_search_tol);
    cur = cur + gamma * d;
    lambda += gamma;
    if (gamma < len) break;
    cur = snap(P, x, w, cur, lambda);
    if (opts.use_L_early_exit && lambda >= one_over_L) break;
  }
  out.point = cur;
  out.lambda = lambda;
  return out;
}

void write_curve_csv(std::ostream& out, const ProjectionCurve& curve) {
  out << "index,lambda_minus,lambda_plus,step_kind";
  for (Eigen::Index j = 0; j < curve.origin.size(); ++j) out << ",x" << (j + 1);
  out << '\n';
  for (std::size_t i = 0; i < curve.breakpoints.size(); ++i) {
    const Breakpoint& bp = curve.breakpoints[i];
    out << i << ',' << format_number(bp.lambda_minus) << ',' << format_number(bp.lambda_plus) << ',' << to_string(bp.step_kind);
    for (Eigen::Index j = 0; j < bp.point.size(); ++j) out << ',' << format_number(bp.point[j]);
    out << '\n';
  }
}

}  // namespace shadowcg
