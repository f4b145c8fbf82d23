#include "shadowcg/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

#include "shadowcg/error.hpp"
#include "shadowcg/lp.hpp"

namespace shadowcg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double row_tol(double b) { return kActiveTol * (1.0 + std::abs(b)); }

double l1_tol(double r) { return kActiveTol * (1.0 + r); }

void require_dim(const Polytope& P, const Vector& v, const char* what) {
  if (v.size() != P.dim()) throw Error(ErrorCode::DimensionMismatch, what);
}

// Root of a t - c - sum_j (b_j - t)_+, which is increasing in t; clamped at lo.
double pl_root(double a, double c, std::vector<double> b, double lo) {
  std::sort(b.begin(), b.end(), std::greater<double>());
  if (std::isfinite(lo)) {
    double f = a * lo - c;
    for (double bj : b) f -= std::max(bj - lo, 0.0);
    if (f >= 0.0) return lo;
  }
  double sum = 0.0;
  double t = lo;
  const std::size_t K = b.size();
  for (std::size_t k = 0; k <= K; ++k) {
    if (a + static_cast<double>(k) > 0.0) {
      t = (c + sum) / (a + static_cast<double>(k));
      const double above = k == 0 ? kInf : b[k - 1];
      const double below = k < K ? b[k] : -kInf;
      if (t <= above && t >= below) return std::max(t, lo);
    }
    if (k < K) sum += b[k];
  }
  return std::max(t, lo);
}

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Shortest s-t path in the DAG restricted to usable edges; returns edge indicator.
Vector dag_shortest_path(const Polytope& P, const Vector& c, const std::vector<bool>* usable) {
  const FlowGraph& g = *P.flow();
  std::vector<double> dist(static_cast<std::size_t>(g.nodes), kInf);
  std::vector<int> pred(static_cast<std::size_t>(g.nodes), -1);
  std::vector<std::vector<int>> out(static_cast<std::size_t>(g.nodes));
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    if (usable && !(*usable)[e]) continue;
    out[static_cast<std::size_t>(g.edges[e].first)].push_back(static_cast<int>(e));
  }
  dist[static_cast<std::size_t>(g.source)] = 0.0;
  for (int u : P.topological_order()) {
    const double du = dist[static_cast<std::size_t>(u)];
    if (!std::isfinite(du)) continue;
    for (int e : out[static_cast<std::size_t>(u)]) {
      const int v = g.edges[static_cast<std::size_t>(e)].second;
      const double cand = du + c[e];
      if (cand < dist[static_cast<std::size_t>(v)]) {
        dist[static_cast<std::size_t>(v)] = cand;
        pred[static_cast<std::size_t>(v)] = e;
      }
    }
  }
  if (!std::isfinite(dist[static_cast<std::size_t>(g.sink)])) {
    throw Error(ErrorCode::Disconnected, "flow oracle: sink unreachable on the usable edges");
  }
  Vector x = Vector::Zero(static_cast<Eigen::Index>(g.edges.size()));
  int v = g.sink;
  while (v != g.source) {
    const int e = pred[static_cast<std::size_t>(v)];
    x[e] = 1.0;
    v = g.edges[static_cast<std::size_t>(e)].first;
  }
  return x;
}

Vector generic_lo(const Polytope& P, const Vector& c, const std::vector<int>* equalities) {
  lp::LinearProgram prog;
  prog.objective = c;
  prog.G = P.A();
  prog.h = P.b();
  if (equalities && !equalities->empty()) {
    prog.E.resize(static_cast<Eigen::Index>(equalities->size()), P.dim());
    prog.f.resize(static_cast<Eigen::Index>(equalities->size()));
    for (std::size_t k = 0; k < equalities->size(); ++k) {
      prog.E.row(static_cast<Eigen::Index>(k)) = P.A().row((*equalities)[k]);
      prog.f[static_cast<Eigen::Index>(k)] = P.b()[(*equalities)[k]];
    }
  }
  lp::LpSolution sol = lp::solve_lp(prog);
  if (sol.status == lp::LpStatus::Infeasible) {
    throw Error(ErrorCode::Infeasible, "lo_oracle: empty polytope or face");
  }
  if (sol.status == lp::LpStatus::Unbounded) {
    throw Error(ErrorCode::Unbounded, "lo_oracle: unbounded polytope");
  }
  return sol.point;
}

}  // namespace

const char* to_string(PolytopeKind kind) {
  switch (kind) {
    case PolytopeKind::Generic: return "generic";
    case PolytopeKind::Box: return "box";
    case PolytopeKind::Simplex: return "simplex";
    case PolytopeKind::L1Ball: return "l1";
    case PolytopeKind::Flow: return "flow";
  }
  return "generic";
}

bool ActiveSet::subset_of(const ActiveSet& other) const {
  if (l1 != other.l1) return false;
  if (!l1) return std::includes(other.indices.begin(), other.indices.end(), indices.begin(), indices.end());
  if (!on_boundary) return true;
  if (!other.on_boundary) return false;
  for (std::size_t j = 0; j < signs.size(); ++j) {
    if (other.signs[j] != 0 && other.signs[j] != signs[j]) return false;
  }
  return true;
}

bool ActiveSet::operator==(const ActiveSet& other) const {
  if (l1 != other.l1) return false;
  if (!l1) return indices == other.indices;
  if (on_boundary != other.on_boundary) return false;
  return !on_boundary || signs == other.signs;
}

Polytope Polytope::generic(DenseMatrix A, Vector b) {
  if (A.rows() != b.size()) throw Error(ErrorCode::DimensionMismatch, "Polytope: rows(A) != len(b)");
  if (A.cols() == 0) throw Error(ErrorCode::InvalidArgument, "Polytope: zero dimension");
  linalg::require_finite(A, "Polytope: A");
  linalg::require_finite(b, "Polytope: b");
  Polytope P;
  P.kind_ = PolytopeKind::Generic;
  P.dim_ = A.cols();
  P.A_ = std::move(A);
  P.b_ = std::move(b);
  P.detect_pairs();
  P.finish_explicit();
  return P;
}

Polytope Polytope::box(Vector lower, Vector upper) {
  if (lower.size() != upper.size() || lower.size() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "box: bound sizes");
  }
  linalg::require_finite(lower, "box: lower");
  linalg::require_finite(upper, "box: upper");
  const Eigen::Index n = lower.size();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (lower[j] > upper[j]) throw Error(ErrorCode::Infeasible, "box: lower > upper");
  }
  Polytope P;
  P.kind_ = PolytopeKind::Box;
  P.dim_ = n;
  P.A_ = DenseMatrix::Zero(2 * n, n);
  P.b_.resize(2 * n);
  for (Eigen::Index j = 0; j < n; ++j) {
    P.A_(2 * j, j) = 1.0;
    P.b_[2 * j] = upper[j];
    P.A_(2 * j + 1, j) = -1.0;
    P.b_[2 * j + 1] = -lower[j];
  }
  P.lower_ = std::move(lower);
  P.upper_ = std::move(upper);
  P.detect_pairs();
  P.diameter_bound_ = (P.upper_ - P.lower_).norm();
  return P;
}

Polytope Polytope::simplex(int dim) {
  if (dim < 1) throw Error(ErrorCode::InvalidArgument, "simplex: dim < 1");
  const Eigen::Index n = dim;
  Polytope P;
  P.kind_ = PolytopeKind::Simplex;
  P.dim_ = n;
  P.A_ = DenseMatrix::Zero(n + 2, n);
  P.b_ = Vector::Zero(n + 2);
  for (Eigen::Index j = 0; j < n; ++j) P.A_(j, j) = -1.0;
  P.A_.row(n).setOnes();
  P.b_[n] = 1.0;
  P.A_.row(n + 1).setConstant(-1.0);
  P.b_[n + 1] = -1.0;
  P.lower_ = Vector::Zero(n);
  P.upper_ = Vector::Ones(n);
  P.detect_pairs();
  P.diameter_bound_ = std::sqrt(static_cast<double>(n));
  return P;
}

Polytope Polytope::l1_ball(int dim, double radius) {
  if (dim < 1) throw Error(ErrorCode::InvalidArgument, "l1_ball: dim < 1");
  if (!std::isfinite(radius)) throw Error(ErrorCode::NonFiniteInput, "l1_ball: radius");
  if (radius <= 0.0) throw Error(ErrorCode::InvalidArgument, "l1_ball: radius must be positive");
  Polytope P;
  P.kind_ = PolytopeKind::L1Ball;
  P.dim_ = dim;
  P.radius_ = radius;
  P.lower_ = Vector::Constant(dim, -radius);
  P.upper_ = Vector::Constant(dim, radius);
  P.diameter_bound_ = 2.0 * radius * std::sqrt(static_cast<double>(dim));
  return P;
}

std::pair<DenseMatrix, Vector> Polytope::l1_rows() const {
  if (kind_ != PolytopeKind::L1Ball) return {A_, b_};
  if (dim_ > 12) throw Error(ErrorCode::UnsupportedPolytope, "l1_rows: dimension above 12");
  const Eigen::Index m = Eigen::Index{1} << dim_;
  DenseMatrix A(m, dim_);
  for (Eigen::Index k = 0; k < m; ++k) {
    for (Eigen::Index j = 0; j < dim_; ++j) A(k, j) = ((k >> j) & 1) ? -1.0 : 1.0;
  }
  return {A, Vector::Constant(m, radius_)};
}

void Polytope::detect_pairs() {
  const Eigen::Index m = A_.rows();
  partner_.assign(static_cast<std::size_t>(m), -1);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (partner_[static_cast<std::size_t>(i)] >= 0) continue;
    const double scale = 1e-12 * (1.0 + A_.row(i).norm());
    for (Eigen::Index j = i + 1; j < m; ++j) {
      if (partner_[static_cast<std::size_t>(j)] >= 0) continue;
      if (std::abs(b_[i] + b_[j]) > 1e-12 * (1.0 + std::abs(b_[i]))) continue;
      if ((A_.row(i) + A_.row(j)).lpNorm<Eigen::Infinity>() > scale) continue;
      partner_[static_cast<std::size_t>(i)] = static_cast<int>(j);
      partner_[static_cast<std::size_t>(j)] = static_cast<int>(i);
      break;
    }
  }
}

void Polytope::finish_explicit() {
  // Coordinate ranges double as the nonempty/bounded check.
  lower_.resize(dim_);
  upper_.resize(dim_);
  for (Eigen::Index j = 0; j < dim_; ++j) {
    Vector e = Vector::Zero(dim_);
    e[j] = 1.0;
    lower_[j] = lo_oracle(*this, e)[j];
    upper_[j] = lo_oracle(*this, -e)[j];
  }
  diameter_bound_ = (upper_ - lower_).norm();
}

Polytope make_flow_polytope(const FlowGraph& dag) {
  if (dag.nodes < 2) throw Error(ErrorCode::InvalidArgument, "flow: need at least two nodes");
  if (dag.source < 0 || dag.source >= dag.nodes || dag.sink < 0 || dag.sink >= dag.nodes ||
      dag.source == dag.sink) {
    throw Error(ErrorCode::InvalidArgument, "flow: bad source/sink");
  }
  if (dag.edges.empty()) throw Error(ErrorCode::Disconnected, "flow: no edges");
  const auto nn = static_cast<std::size_t>(dag.nodes);
  std::vector<int> indeg(nn, 0);
  std::vector<std::vector<int>> succ(nn);
  for (const auto& [u, v] : dag.edges) {
    if (u < 0 || u >= dag.nodes || v < 0 || v >= dag.nodes) {
      throw Error(ErrorCode::InvalidArgument, "flow: edge endpoint out of range");
    }
    if (u == v) throw Error(ErrorCode::NotADag, "flow: self loop");
    succ[static_cast<std::size_t>(u)].push_back(v);
    ++indeg[static_cast<std::size_t>(v)];
  }
  std::vector<int> topo;
  std::priority_queue<int, std::vector<int>, std::greater<int>> ready;
  for (int v = 0; v < dag.nodes; ++v) {
    if (indeg[static_cast<std::size_t>(v)] == 0) ready.push(v);
  }
  while (!ready.empty()) {
    const int u = ready.top();
    ready.pop();
    topo.push_back(u);
    for (int v : succ[static_cast<std::size_t>(u)]) {
      if (--indeg[static_cast<std::size_t>(v)] == 0) ready.push(v);
    }
  }
  if (topo.size() != nn) throw Error(ErrorCode::NotADag, "flow: graph has a cycle");

  std::vector<bool> seen(nn, false);
  std::vector<int> stack{dag.source};
  seen[static_cast<std::size_t>(dag.source)] = true;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int v : succ[static_cast<std::size_t>(u)]) {
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = true;
        stack.push_back(v);
      }
    }
  }
  if (!seen[static_cast<std::size_t>(dag.sink)]) {
    throw Error(ErrorCode::Disconnected, "flow: sink not reachable from source");
  }

  const auto n = static_cast<Eigen::Index>(dag.edges.size());
  std::vector<bool> touched(nn, false);
  for (const auto& [u, v] : dag.edges) {
    touched[static_cast<std::size_t>(u)] = true;
    touched[static_cast<std::size_t>(v)] = true;
  }
  std::vector<int> cons_nodes;
  for (int v = 0; v < dag.nodes; ++v) {
    if (v != dag.sink && touched[static_cast<std::size_t>(v)]) cons_nodes.push_back(v);
  }
  const Eigen::Index m = 2 * n + 2 * static_cast<Eigen::Index>(cons_nodes.size());

  Polytope P;
  P.kind_ = PolytopeKind::Flow;
  P.dim_ = n;
  P.A_ = DenseMatrix::Zero(m, n);
  P.b_ = Vector::Zero(m);
  for (Eigen::Index e = 0; e < n; ++e) {
    P.A_(2 * e, e) = 1.0;
    P.b_[2 * e] = 1.0;
    P.A_(2 * e + 1, e) = -1.0;
  }
  Eigen::Index row = 2 * n;
  for (int v : cons_nodes) {
    for (Eigen::Index e = 0; e < n; ++e) {
      const auto& [a, c] = dag.edges[static_cast<std::size_t>(e)];
      double coef = 0.0;
      if (a == v) coef += 1.0;
      if (c == v) coef -= 1.0;
      P.A_(row, e) = coef;
      P.A_(row + 1, e) = -coef;
    }
    const double supply = v == dag.source ? 1.0 : 0.0;
    P.b_[row] = supply;
    P.b_[row + 1] = -supply;
    row += 2;
  }
  P.flow_ = std::make_shared<const FlowGraph>(dag);
  P.topo_ = std::move(topo);
  P.detect_pairs();

  P.lower_.resize(n);
  P.upper_.resize(n);
  for (Eigen::Index e = 0; e < n; ++e) {
    Vector c = Vector::Zero(n);
    c[e] = 1.0;
    P.lower_[e] = dag_shortest_path(P, c, nullptr)[e];
    P.upper_[e] = dag_shortest_path(P, -c, nullptr)[e];
  }
  P.diameter_bound_ = (P.upper_ - P.lower_).norm();
  return P;
}

double max_violation(const Polytope& P, const Vector& x) {
  require_dim(P, x, "max_violation: dimension");
  if (P.kind() == PolytopeKind::L1Ball) return std::max(x.lpNorm<1>() - P.radius(), 0.0);
  if (P.rows() == 0) return 0.0;
  return std::max((P.A() * x - P.b()).maxCoeff(), 0.0);
}

ActiveSet active_set(const Polytope& P, const Vector& x) {
  require_dim(P, x, "active_set: dimension");
  linalg::require_finite(x, "active_set: x");
  ActiveSet out;
  if (P.kind() == PolytopeKind::L1Ball) {
    out.l1 = true;
    const double r = P.radius();
    const double tol = l1_tol(r);
    const double norm1 = x.lpNorm<1>();
    if (norm1 - r > tol) throw Error(ErrorCode::Infeasible, "active_set: outside the l1 ball");
    out.on_boundary = std::abs(norm1 - r) <= tol;
    if (out.on_boundary) {
      out.signs.assign(static_cast<std::size_t>(P.dim()), 0);
      for (Eigen::Index j = 0; j < P.dim(); ++j) {
        if (std::abs(x[j]) > 0.5 * tol) out.signs[static_cast<std::size_t>(j)] = x[j] > 0 ? 1 : -1;
      }
    }
    return out;
  }
  const Vector r = P.A() * x - P.b();
  for (Eigen::Index i = 0; i < P.rows(); ++i) {
    const double tol = row_tol(P.b()[i]);
    if (r[i] > tol) throw Error(ErrorCode::Infeasible, "active_set: constraint violated");
    if (r[i] >= -tol) out.indices.push_back(static_cast<int>(i));
  }
  return out;
}

double max_step(const Polytope& P, const Vector& x, const Vector& d) {
  require_dim(P, x, "max_step: dimension");
  require_dim(P, d, "max_step: dimension");
  linalg::require_finite(x, "max_step: x");
  linalg::require_finite(d, "max_step: d");
  const double dn = d.norm();
  if (dn == 0.0) return 0.0;

  if (P.kind() == PolytopeKind::L1Ball) {
    const double r = P.radius();
    const double tol = l1_tol(r);
    double val = x.lpNorm<1>();
    if (val - r > tol) throw Error(ErrorCode::Infeasible, "max_step: x outside the l1 ball");
    const double target = std::max(r, val);
    const double zero = 0.5 * tol;
    double slope = 0.0;
    std::vector<std::pair<double, double>> events;  // (delta, slope increase)
    for (Eigen::Index j = 0; j < P.dim(); ++j) {
      if (std::abs(x[j]) <= zero) {
        slope += std::abs(d[j]);
      } else {
        const double sd = sign_of(x[j]) * d[j];
        slope += sd;
        if (sd < 0.0) events.emplace_back(std::abs(x[j]) / -sd, 2.0 * -sd);
      }
    }
    std::sort(events.begin(), events.end());
    const double slope_tol = 1e-12 * d.lpNorm<1>();
    double delta = 0.0;
    for (const auto& [at, inc] : events) {
      if (slope > slope_tol) {
        const double hit = delta + (target - val) / slope;
        if (hit <= at) return std::max(hit, 0.0);
      }
      val += slope * (at - delta);
      delta = at;
      slope += inc;
    }
    if (slope > slope_tol) return std::max(delta + (target - val) / slope, 0.0);
    return delta;
  }

  double best = kInf;
  const Vector ad = P.A() * d;
  const Vector slack = P.b() - P.A() * x;
  for (Eigen::Index i = 0; i < P.rows(); ++i) {
    const double tol = row_tol(P.b()[i]);
    if (slack[i] < -tol) throw Error(ErrorCode::Infeasible, "max_step: x infeasible");
    const double an = P.A().row(i).norm();
    if (slack[i] <= tol) {
      if (ad[i] > kActiveTol * an * dn) return 0.0;
      // Rounding-level drift into a tight row may use half the activity band.
      if (ad[i] > 0.0) best = std::min(best, std::max(slack[i] + 0.5 * tol, 0.0) / ad[i]);
      continue;
    }
    if (ad[i] <= 1e-14 * an * dn) continue;
    best = std::min(best, slack[i] / ad[i]);
  }
  if (!std::isfinite(best)) {
    throw Error(ErrorCode::Unbounded, "max_step: ray does not leave the polytope");
  }
  return best;
}

Vector lo_oracle(const Polytope& P, const Vector& c) {
  require_dim(P, c, "lo_oracle: dimension");
  linalg::require_finite(c, "lo_oracle: c");
  const Eigen::Index n = P.dim();
  switch (P.kind()) {
    case PolytopeKind::Generic:
      return generic_lo(P, c, nullptr);
    case PolytopeKind::Box: {
      Vector v(n);
      for (Eigen::Index j = 0; j < n; ++j) v[j] = c[j] < 0.0 ? P.upper_bounds()[j] : P.lower_bounds()[j];
      return v;
    }
    case PolytopeKind::Simplex: {
      Eigen::Index j = 0;
      for (Eigen::Index k = 1; k < n; ++k) {
        if (c[k] < c[j]) j = k;
      }
      Vector v = Vector::Zero(n);
      v[j] = 1.0;
      return v;
    }
    case PolytopeKind::L1Ball: {
      Eigen::Index j = 0;
      for (Eigen::Index k = 1; k < n; ++k) {
        if (std::abs(c[k]) > std::abs(c[j])) j = k;
      }
      Vector v = Vector::Zero(n);
      v[j] = c[j] > 0.0 ? -P.radius() : P.radius();
      return v;
    }
    case PolytopeKind::Flow:
      return dag_shortest_path(P, c, nullptr);
  }
  return Vector::Zero(n);
}

Vector lo_oracle_face(const Polytope& P, const Vector& x, const Vector& c) {
  require_dim(P, c, "lo_oracle_face: dimension");
  linalg::require_finite(c, "lo_oracle_face: c");
  const ActiveSet act = active_set(P, x);
  const Eigen::Index n = P.dim();
  switch (P.kind()) {
    case PolytopeKind::Generic:
      return generic_lo(P, c, &act.indices);
    case PolytopeKind::Box: {
      Vector v(n);
      for (Eigen::Index j = 0; j < n; ++j) {
        const double lo = P.lower_bounds()[j];
        const double hi = P.upper_bounds()[j];
        if (std::abs(x[j] - hi) <= row_tol(hi)) {
          v[j] = hi;
        } else if (std::abs(x[j] - lo) <= row_tol(lo)) {
          v[j] = lo;
        } else {
          v[j] = c[j] < 0.0 ? hi : lo;
        }
      }
      return v;
    }
    case PolytopeKind::Simplex: {
      Eigen::Index best = -1;
      for (Eigen::Index k = 0; k < n; ++k) {
        if (x[k] <= kActiveTol) continue;
        if (best < 0 || c[k] < c[best]) best = k;
      }
      Vector v = Vector::Zero(n);
      v[best < 0 ? 0 : best] = 1.0;
      return v;
    }
    case PolytopeKind::L1Ball: {
      if (!act.on_boundary) return lo_oracle(P, c);
      Eigen::Index best = -1;
      double best_val = kInf;
      for (Eigen::Index k = 0; k < n; ++k) {
        const signed char s = act.signs[static_cast<std::size_t>(k)];
        if (s == 0) continue;
        const double val = s * c[k];
        if (val < best_val) {
          best_val = val;
          best = k;
        }
      }
      Vector v = Vector::Zero(n);
      v[best] = act.signs[static_cast<std::size_t>(best)] * P.radius();
      return v;
    }
    case PolytopeKind::Flow: {
      std::vector<bool> usable(static_cast<std::size_t>(n));
      for (Eigen::Index e = 0; e < n; ++e) usable[static_cast<std::size_t>(e)] = x[e] > kActiveTol;
      return dag_shortest_path(P, c, &usable);
    }
  }
  return Vector::Zero(n);
}

bool normal_cone_member(const Polytope& P, const Vector& x, const Vector& y) {
  require_dim(P, y, "normal_cone_member: dimension");
  linalg::require_finite(y, "normal_cone_member: y");
  return NormalCone(P, x).contains(y);
}

// ---------------------------------------------------------------------------

struct NormalCone::Impl {
  Eigen::Index n = 0;
  bool l1 = false;

  // Explicit polytopes.
  DenseMatrix rows;             // all active rows, sorted by index
  std::vector<int> ineq;        // positions (into rows) without an active partner
  std::vector<int> eq;          // positions of the lower-index row of each active pair
  std::vector<int> eq_partner;  // positions of the matching upper-index row

  // l1 ball.
  double radius = 0.0;
  std::vector<Eigen::Index> S;
  std::vector<Eigen::Index> Zc;
  Vector s;  // signs, zero off the support

  // Normal cone at the current point projected along the l1 structure.
  Vector l1_project(const Vector& v, double* tau_out) const {
    double c = 0.0;
    for (Eigen::Index j : S) c += s[j] * v[j];
    std::vector<double> b;
    b.reserve(Zc.size());
    for (Eigen::Index j : Zc) b.push_back(std::abs(v[j]));
    const double tau = pl_root(static_cast<double>(S.size()), c, std::move(b), 0.0);
    Vector out = Vector::Zero(n);
    for (Eigen::Index j : S) out[j] = tau * s[j];
    for (Eigen::Index j : Zc) out[j] = std::clamp(v[j], -tau, tau);
    if (tau_out) *tau_out = tau;
    return out;
  }
};

NormalCone::NormalCone(const Polytope& P, const Vector& x)
    : active_(active_set(P, x)), impl_(std::make_unique<Impl>()) {
  Impl& m = *impl_;
  m.n = P.dim();
  if (P.kind() == PolytopeKind::L1Ball) {
    m.l1 = true;
    m.radius = P.radius();
    m.s = Vector::Zero(m.n);
    if (active_.on_boundary) {
      for (Eigen::Index j = 0; j < m.n; ++j) {
        const signed char sg = active_.signs[static_cast<std::size_t>(j)];
        if (sg != 0) {
          m.S.push_back(j);
          m.s[j] = sg;
        } else {
          m.Zc.push_back(j);
        }
      }
    }
    return;
  }
  const auto k = static_cast<Eigen::Index>(active_.indices.size());
  m.rows.resize(k, m.n);
  std::vector<int> pos_of(static_cast<std::size_t>(P.rows()), -1);
  for (Eigen::Index r = 0; r < k; ++r) {
    const int i = active_.indices[static_cast<std::size_t>(r)];
    m.rows.row(r) = P.A().row(i);
    pos_of[static_cast<std::size_t>(i)] = static_cast<int>(r);
  }
  for (Eigen::Index r = 0; r < k; ++r) {
    const int i = active_.indices[static_cast<std::size_t>(r)];
    const int j = P.partner(i);
    if (j >= 0 && pos_of[static_cast<std::size_t>(j)] >= 0) {
      if (i < j) {
        m.eq.push_back(static_cast<int>(r));
        m.eq_partner.push_back(pos_of[static_cast<std::size_t>(j)]);
      }
    } else {
      m.ineq.push_back(static_cast<int>(r));
    }
  }
}

NormalCone::~NormalCone() = default;
NormalCone::NormalCone(NormalCone&&) noexcept = default;
NormalCone& NormalCone::operator=(NormalCone&&) noexcept = default;

DenseMatrix NormalCone::active_rows() const { return impl_->rows; }

ConeSplit NormalCone::project(const Vector& v) const {
  const Impl& m = *impl_;
  if (v.size() != m.n) throw Error(ErrorCode::DimensionMismatch, "normal cone: dimension");
  linalg::require_finite(v, "normal cone: vector");
  ConeSplit out;
  if (active_.empty()) {
    out.normal = Vector::Zero(m.n);
    out.multipliers = m.l1 ? Vector::Zero(1) : Vector(0);
    return out;
  }
  if (m.l1) {
    double tau = 0.0;
    out.normal = m.l1_project(v, &tau);
    out.multipliers = Vector::Constant(1, tau);
    return out;
  }
  // Active pairs enter as both a and -a, so one NNLS covers the span part.
  const linalg::NnlsResult nn = linalg::nnls(m.rows, v);
  out.normal = m.rows.transpose() * nn.mu;
  out.multipliers = nn.mu;
  for (std::size_t q = 0; q < m.eq.size(); ++q) {
    const double net = nn.mu[m.eq[q]] - nn.mu[m.eq_partner[q]];
    out.multipliers[m.eq[q]] = std::max(net, 0.0);
    out.multipliers[m.eq_partner[q]] = std::max(-net, 0.0);
  }
  return out;
}

bool NormalCone::contains(const Vector& y) const {
  const ConeSplit cs = project(y);
  return (y - cs.normal).norm() <= 1e-8 * (1.0 + y.norm());
}

Vector NormalCone::face_direction(const Vector& v) const {
  const Impl& m = *impl_;
  if (v.size() != m.n) throw Error(ErrorCode::DimensionMismatch, "face_direction: dimension");
  if (active_.empty()) return v;
  if (m.l1) {
    Vector d = Vector::Zero(m.n);
    double mean = 0.0;
    for (Eigen::Index j : m.S) mean += m.s[j] * v[j];
    mean /= static_cast<double>(m.S.size());
    for (Eigen::Index j : m.S) d[j] = v[j] - mean * m.s[j];
    return d;
  }
  return linalg::pseudoinverse_projector(m.rows) * v;
}

Vector NormalCone::critical_direction(const Vector& v, const Vector& p) const {
  const Impl& m = *impl_;
  if (v.size() != m.n || p.size() != m.n) {
    throw Error(ErrorCode::DimensionMismatch, "critical_direction: dimension");
  }
  if (active_.empty()) return v;
  if (m.l1) {
    double tau0 = 0.0;
    for (Eigen::Index j : m.S) tau0 += m.s[j] * p[j];
    tau0 /= static_cast<double>(m.S.size());
    if (tau0 <= 1e-14 * (1.0 + p.norm())) return v - m.l1_project(v, nullptr);
    std::vector<Eigen::Index> E;
    std::vector<double> sigma, b;
    for (Eigen::Index j : m.Zc) {
      const double u = p[j] / tau0;
      if (std::abs(u) >= 1.0 - 1e-9) {
        E.push_back(j);
        sigma.push_back(sign_of(u));
        b.push_back(sign_of(u) * v[j]);
      }
    }
    double c = 0.0;
    for (Eigen::Index j : m.S) c += m.s[j] * v[j];
    const double theta = pl_root(static_cast<double>(m.S.size()), c, b, -kInf);
    Vector d = Vector::Zero(m.n);
    for (Eigen::Index j : m.S) d[j] = v[j] - theta * m.s[j];
    for (std::size_t q = 0; q < E.size(); ++q) d[E[q]] = sigma[q] * std::max(b[q] - theta, 0.0);
    return d;
  }
  // T cap p^perp = {d in T : a_i d = 0 wherever p carries a positive multiplier};
  // its polar is generated by +-a_i for those rows (and active pairs) and a_i for the rest.
  const linalg::NnlsResult np = linalg::nnls(m.rows, p);
  std::vector<bool> tight(static_cast<std::size_t>(m.rows.rows()), false);
  for (std::size_t q = 0; q < m.eq.size(); ++q) {
    tight[static_cast<std::size_t>(m.eq[q])] = true;
    tight[static_cast<std::size_t>(m.eq_partner[q])] = true;
  }
  for (int r : m.ineq) {
    if (np.mu[r] * m.rows.row(r).norm() > 1e-9 * (1.0 + p.norm())) tight[static_cast<std::size_t>(r)] = true;
  }
  std::vector<Eigen::Index> extra;
  for (int r : m.ineq) {
    if (tight[static_cast<std::size_t>(r)]) extra.push_back(r);
  }
  DenseMatrix gens(m.rows.rows() + static_cast<Eigen::Index>(extra.size()), m.n);
  gens.topRows(m.rows.rows()) = m.rows;
  for (std::size_t q = 0; q < extra.size(); ++q) gens.row(m.rows.rows() + static_cast<Eigen::Index>(q)) = -m.rows.row(extra[q]);
  return linalg::nnls(gens, v).residual;
}

double NormalCone::stable_length(const Vector& p, const Vector& v, const Vector& d, double cap) const {
  const Impl& m = *impl_;
  if (p.size() != m.n || v.size() != m.n || d.size() != m.n) {
    throw Error(ErrorCode::DimensionMismatch, "stable_length: dimension");
  }
  const double dn = d.norm();
  if (m.l1) {
    const double tol_p = 1e-8 * (1.0 + p.norm());
    const double tol_v = 1e-8 * (1.0 + v.norm());
    if (active_.empty()) {
      if (p.norm() > tol_p) return 0.0;
      return v.norm() <= tol_v ? cap : 0.0;
    }
    const double dz = 1e-13 * (1.0 + d.lpNorm<Eigen::Infinity>());
    std::vector<Eigen::Index> Sp;
    std::vector<double> sp;
    std::vector<Eigen::Index> Zp;
    for (Eigen::Index j : m.S) {
      Sp.push_back(j);
      sp.push_back(m.s[j]);
    }
    for (Eigen::Index j : m.Zc) {
      if (std::abs(d[j]) > dz) {
        Sp.push_back(j);
        sp.push_back(sign_of(d[j]));
      } else {
        Zp.push_back(j);
      }
    }
    double tau0 = 0.0, theta = 0.0;
    for (std::size_t q = 0; q < Sp.size(); ++q) {
      tau0 += sp[q] * p[Sp[q]];
      theta += sp[q] * v[Sp[q]];
    }
    tau0 /= static_cast<double>(Sp.size());
    theta /= static_cast<double>(Sp.size());
    for (std::size_t q = 0; q < Sp.size(); ++q) {
      if (std::abs(sp[q] * p[Sp[q]] - tau0) > tol_p) return 0.0;
      if (std::abs(sp[q] * v[Sp[q]] - theta) > tol_v) return 0.0;
    }
    double t = cap;
    auto limit = [&](double alpha, double beta) {
      if (beta > 1e-14 * (1.0 + v.norm())) t = std::min(t, std::max(-alpha, 0.0) / beta);
    };
    limit(-tau0, -theta);
    for (Eigen::Index j : Zp) {
      limit(p[j] - tau0, v[j] - theta);
      limit(-p[j] - tau0, -v[j] - theta);
    }
    return std::max(t, 0.0);
  }
  std::vector<Eigen::Index> keep;
  for (Eigen::Index r = 0; r < m.rows.rows(); ++r) {
    const double ad = m.rows.row(r).dot(d);
    if (std::abs(ad) <= kActiveTol * m.rows.row(r).norm() * (dn > 0.0 ? dn : 1.0)) keep.push_back(r);
  }
  DenseMatrix gens(static_cast<Eigen::Index>(keep.size()), m.n);
  for (std::size_t q = 0; q < keep.size(); ++q) gens.row(static_cast<Eigen::Index>(q)) = m.rows.row(keep[q]);
  try {
    return lp::max_cone_step(gens, p, v, cap);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InfeasibleContract) throw;
    // p drifted just outside the cone of the rows that stay tight; restart
    // from its projection onto that cone when the gap is at drift level.
    const linalg::NnlsResult nn = linalg::nnls(gens, p);
    if (nn.residual.norm() > 1e-6 * (1.0 + p.norm())) throw;
    return lp::max_cone_step(gens, gens.transpose() * nn.mu, v, cap);
  }
}

}  // namespace shadowcg
