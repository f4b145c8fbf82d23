#pragma once

#include <iosfwd>
#include <limits>
#include <vector>

#include "shadowcg/polytope.hpp"
#include "shadowcg/problems.hpp"

namespace shadowcg {

enum class StepKind { ShadowStep, InFaceStep, Endpoint };

const char* to_string(StepKind kind);

/// A curve point x_i held on [lambda_minus, lambda_plus] and the linear piece
/// leaving it: g(lambda_plus + s) = point + s * segment_direction for
/// s in [0, segment_length].
struct Breakpoint {
  Vector point;
  double lambda_minus = 0.0;
  double lambda_plus = 0.0;
  Vector segment_direction;
  double segment_length = 0.0;
  StepKind step_kind = StepKind::Endpoint;
  Vector normal_vector;  // x0 - lambda_plus w - point
  ActiveSet active;

  Vector end_point() const { return point + segment_length * segment_direction; }
  double end_lambda() const { return lambda_plus + segment_length; }
};

struct ProjectionCurve {
  Vector origin;
  Vector direction;
  std::vector<Breakpoint> breakpoints;

  /// Piecewise-linear reconstruction of g(lambda).
  Vector at(double lambda) const;
};

/// One step of the curve walk from x = g(lambda_x). Returns the breakpoint at x
/// with its outgoing piece. A stall (the curve resting at x) comes back as an
/// InFaceStep with zero direction and lambda_plus advanced past lambda_x.
Breakpoint trace_step(const Polytope& P, const Vector& x0, const Vector& w, const Vector& x,
                      double lambda_x);

struct InFaceMove {
  Vector direction;
  double lambda_hat = 0.0;
};

/// Direction and parameter extent of the piece leaving x when the curve does
/// not follow the shadow (the test <p, shadow> = 0 fails).
InFaceMove trace_in_face(const Polytope& P, const Vector& x0, const Vector& w, const Vector& x,
                         double lambda_x);

/// Throws Error(OffCurve) unless x = project(x0 - lambda_x w) within 1e-7.
void check_on_curve(const Polytope& P, const Vector& x0, const Vector& w, const Vector& x,
                    double lambda_x);

/// Full curve from x0 to its endpoint; at most min(2^m, 10000) steps.
ProjectionCurve trace_curve(const Polytope& P, const Vector& x0, const Vector& w);

struct TraceOptOptions {
  bool use_L_early_exit = true;
  double line_search_tol = 1e-10;
};

struct TraceOptResult {
  Vector point;
  int shadow_calls = 0;
  int segments = 0;
  int in_face_steps = 0;
  double lambda = 0.0;
  bool endpoint = false;
};

/// Walks the curve of w = grad f(x), line-searching each piece, until the
/// line search stops inside a piece, the endpoint is reached or (optionally)
/// the accumulated parameter reaches 1/L.
TraceOptResult trace_opt(const Polytope& P, const QuadraticObjective& f, const Vector& x,
                         const TraceOptOptions& opts = {});

/// index,lambda_minus,lambda_plus,step_kind,x1..xn ; lambda_plus = inf at the endpoint.
void write_curve_csv(std::ostream& out, const ProjectionCurve& curve);

}  // namespace shadowcg
