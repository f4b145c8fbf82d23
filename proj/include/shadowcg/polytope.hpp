#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "shadowcg/linalg.hpp"

namespace shadowcg {

/// Relative activity tolerance: row i is tight when |a_i x - b_i| <= kActiveTol (1 + |b_i|).
inline constexpr double kActiveTol = 1e-9;

enum class PolytopeKind { Generic, Box, Simplex, L1Ball, Flow };

const char* to_string(PolytopeKind kind);

struct FlowGraph {
  int nodes = 0;
  std::vector<std::pair<int, int>> edges;
  int source = 0;
  int sink = 0;
};

/// Tight constraints at a point. Explicit polytopes list row indices; the
/// l1 ball, whose 2^n facets are never stored, is described by the sign
/// pattern of the point (every facet agreeing with it is tight).
struct ActiveSet {
  std::vector<int> indices;
  bool l1 = false;
  bool on_boundary = false;
  std::vector<signed char> signs;

  bool empty() const { return l1 ? !on_boundary : indices.empty(); }
  bool subset_of(const ActiveSet& other) const;
  bool operator==(const ActiveSet& other) const;
};

class Polytope {
 public:
  /// {x : A x <= b}. Throws Infeasible/Unbounded if the region is empty or unbounded.
  static Polytope generic(DenseMatrix A, Vector b);
  static Polytope box(Vector lower, Vector upper);
  /// Probability simplex {x >= 0, sum x = 1}.
  static Polytope simplex(int dim);
  /// {x : ||x||_1 <= radius}.
  static Polytope l1_ball(int dim, double radius);

  PolytopeKind kind() const { return kind_; }
  Eigen::Index dim() const { return dim_; }
  /// Explicit rows; empty for the l1 ball (see l1_rows()).
  const DenseMatrix& A() const { return A_; }
  const Vector& b() const { return b_; }
  Eigen::Index rows() const { return A_.rows(); }
  bool explicit_rows() const { return kind_ != PolytopeKind::L1Ball; }
  /// Index of the row equal to -row i with -b_i, or -1.
  int partner(Eigen::Index i) const { return partner_[static_cast<std::size_t>(i)]; }
  double radius() const { return radius_; }
  double diameter_bound() const { return diameter_bound_; }
  const Vector& lower_bounds() const { return lower_; }
  const Vector& upper_bounds() const { return upper_; }
  const FlowGraph* flow() const { return flow_ ? flow_.get() : nullptr; }
  const std::vector<int>& topological_order() const { return topo_; }

  /// All 2^n facets of the l1 ball, rows s with s_j = +-1; only for dim <= 12.
  std::pair<DenseMatrix, Vector> l1_rows() const;

 private:
  friend Polytope make_flow_polytope(const FlowGraph& dag);
  Polytope() = default;
  void finish_explicit();
  void detect_pairs();

  PolytopeKind kind_ = PolytopeKind::Generic;
  Eigen::Index dim_ = 0;
  DenseMatrix A_;
  Vector b_;
  std::vector<int> partner_;
  double radius_ = 0.0;
  double diameter_bound_ = 0.0;
  Vector lower_;
  Vector upper_;
  std::shared_ptr<const FlowGraph> flow_;
  std::vector<int> topo_;
};

/// Layered or general DAG flow polytope: one variable per edge, unit s-t flow.
Polytope make_flow_polytope(const FlowGraph& dag);

ActiveSet active_set(const Polytope& P, const Vector& x);

/// Largest delta with x + delta d in P; 0 if d leaves P immediately or d = 0.
double max_step(const Polytope& P, const Vector& x, const Vector& d);

Vector lo_oracle(const Polytope& P, const Vector& c);

/// argmin <c, v> over vertices of the minimal face containing x.
Vector lo_oracle_face(const Polytope& P, const Vector& x, const Vector& c);

bool normal_cone_member(const Polytope& P, const Vector& x, const Vector& y);

/// Largest constraint violation at x; 0 when feasible.
double max_violation(const Polytope& P, const Vector& x);

struct ConeSplit {
  Vector normal;       // projection onto N_P(x)
  Vector multipliers;  // one per active row; for the l1 ball a single scale tau
};

/// Normal cone N_P(x) together with the operations the curve tracer needs.
class NormalCone {
 public:
  NormalCone(const Polytope& P, const Vector& x);
  ~NormalCone();
  NormalCone(NormalCone&&) noexcept;
  NormalCone& operator=(NormalCone&&) noexcept;

  const ActiveSet& active() const { return active_; }
  bool trivial() const { return active_.empty(); }

  ConeSplit project(const Vector& v) const;
  bool contains(const Vector& y) const;
  /// Projection onto {d : A_I d = 0}.
  Vector face_direction(const Vector& v) const;
  /// Projection onto the tangent cone intersected with p^perp (p in the cone).
  Vector critical_direction(const Vector& v, const Vector& p) const;
  /// max t in [0, cap] with p + t v in the normal cone at x + t' d for small t'.
  double stable_length(const Vector& p, const Vector& v, const Vector& d, double cap) const;
  /// Explicit active-row matrix (empty for the l1 ball).
  DenseMatrix active_rows() const;

 private:
  struct Impl;
  ActiveSet active_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace shadowcg
