#include "shadowcg/lp.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "shadowcg/error.hpp"

namespace shadowcg::lp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kCostTol = 1e-10;
constexpr double kPivotTol = 1e-11;

// Original variable j = offset + sign * z[pos] - (neg >= 0 ? z[neg] : 0).
struct VarMap {
  int pos = -1;
  int neg = -1;
  double offset = 0.0;
  double sign = 1.0;
};

class Tableau {
 public:
  Tableau(DenseMatrix A, Vector rhs) : rows_(A.rows()), cols_(A.cols()) {
    T_ = DenseMatrix::Zero(rows_ + 1, cols_ + 1);
    T_.topLeftCorner(rows_, cols_) = A;
    T_.col(cols_).head(rows_) = rhs;
    basis_.assign(rows_, -1);
    live_.assign(rows_, true);
  }

  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }
  DenseMatrix& data() { return T_; }
  std::vector<int>& basis() { return basis_; }
  std::vector<bool>& live() { return live_; }

  void pivot(Eigen::Index r, Eigen::Index c) {
    T_.row(r) /= T_(r, c);
    for (Eigen::Index i = 0; i <= rows_; ++i) {
      if (i == r) continue;
      const double factor = T_(i, c);
      if (factor != 0.0) T_.row(i) -= factor * T_.row(r);
      T_(i, c) = 0.0;
    }
    T_(r, c) = 1.0;
    basis_[r] = static_cast<int>(c);
  }

  // Load costs into the objective row as reduced costs against the basis.
  void set_costs(const Vector& cost) {
    T_.row(rows_).setZero();
    T_.row(rows_).head(cols_) = cost.transpose();
    for (Eigen::Index r = 0; r < rows_; ++r) {
      if (!live_[r]) continue;
      const double cb = cost[basis_[r]];
      if (cb != 0.0) T_.row(rows_) -= cb * T_.row(r);
    }
  }

  // Returns false when the objective is unbounded below.
  bool optimize(const std::vector<bool>& allowed, int& pivots, int cap) {
    while (true) {
      Eigen::Index enter = -1;
      for (Eigen::Index j = 0; j < cols_; ++j) {
        if (allowed[j] && T_(rows_, j) < -kCostTol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;
      Eigen::Index leave = -1;
      double best = kInf;
      for (Eigen::Index r = 0; r < rows_; ++r) {
        if (!live_[r]) continue;
        const double a = T_(r, enter);
        if (a <= kPivotTol) continue;
        const double ratio = std::max(T_(r, cols_), 0.0) / a;
        const double slack = 1e-14 * (1.0 + std::abs(best));
        if (leave < 0 || ratio < best - slack) {
          best = ratio;
          leave = r;
        } else if (ratio <= best + slack && basis_[r] < basis_[leave]) {
          leave = r;
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
      if (++pivots > cap) {
        throw Error(ErrorCode::NumericalStall, "solve_lp: pivot cap reached");
      }
    }
  }

  double objective_value() const { return -T_(rows_, cols_); }

 private:
  Eigen::Index rows_;
  Eigen::Index cols_;
  DenseMatrix T_;
  std::vector<int> basis_;
  std::vector<bool> live_;
};

}  // namespace

LpSolution solve_lp(const LinearProgram& p) {
  const Eigen::Index n = p.objective.size();
  const bool has_lower = p.lower.size() > 0;
  const bool has_upper = p.upper.size() > 0;
  if ((p.G.rows() > 0 && p.G.cols() != n) || p.G.rows() != p.h.size() ||
      (p.E.rows() > 0 && p.E.cols() != n) || p.E.rows() != p.f.size() ||
      (has_lower && p.lower.size() != n) || (has_upper && p.upper.size() != n)) {
    throw Error(ErrorCode::DimensionMismatch, "solve_lp: inconsistent program");
  }
  linalg::require_finite(p.objective, "solve_lp: objective");
  linalg::require_finite(p.G, "solve_lp: G");
  linalg::require_finite(p.h, "solve_lp: h");
  linalg::require_finite(p.E, "solve_lp: E");
  linalg::require_finite(p.f, "solve_lp: f");
  for (Eigen::Index j = 0; j < n; ++j) {
    if ((has_lower && std::isnan(p.lower[j])) || (has_upper && std::isnan(p.upper[j]))) {
      throw Error(ErrorCode::NonFiniteInput, "solve_lp: bounds");
    }
  }

  // Variable substitution into z >= 0.
  std::vector<VarMap> map(n);
  std::vector<std::pair<int, double>> bound_rows;  // (z column, width)
  int nz = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double lo = has_lower ? p.lower[j] : -kInf;
    const double hi = has_upper ? p.upper[j] : kInf;
    VarMap& vm = map[j];
    if (std::isfinite(lo)) {
      vm.pos = nz++;
      vm.offset = lo;
      if (std::isfinite(hi)) bound_rows.emplace_back(vm.pos, hi - lo);
    } else if (std::isfinite(hi)) {
      vm.pos = nz++;
      vm.offset = hi;
      vm.sign = -1.0;
    } else {
      vm.pos = nz++;
      vm.neg = nz++;
    }
  }

  const Eigen::Index m_ineq = p.G.rows() + static_cast<Eigen::Index>(bound_rows.size());
  const Eigen::Index m_eq = p.E.rows();
  const Eigen::Index m = m_ineq + m_eq;
  const Eigen::Index n_std = nz + m_ineq;  // structural + slacks

  DenseMatrix A = DenseMatrix::Zero(m, n_std);
  Vector rhs = Vector::Zero(m);
  Vector cost = Vector::Zero(n_std);

  auto place = [&](Eigen::Index row, const auto& coeffs, double rhs_value) {
    double r = rhs_value;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double a = coeffs[j];
      if (a == 0.0) continue;
      const VarMap& vm = map[j];
      A(row, vm.pos) += a * vm.sign;
      if (vm.neg >= 0) A(row, vm.neg) -= a;
      r -= a * vm.offset;
    }
    rhs[row] = r;
  };

  for (Eigen::Index i = 0; i < p.G.rows(); ++i) {
    place(i, p.G.row(i), p.h[i]);
    A(i, nz + i) = 1.0;
  }
  for (std::size_t k = 0; k < bound_rows.size(); ++k) {
    const Eigen::Index row = p.G.rows() + static_cast<Eigen::Index>(k);
    A(row, bound_rows[k].first) = 1.0;
    A(row, nz + row) = 1.0;
    rhs[row] = bound_rows[k].second;
  }
  for (Eigen::Index i = 0; i < m_eq; ++i) place(m_ineq + i, p.E.row(i), p.f[i]);
  for (Eigen::Index j = 0; j < n; ++j) {
    const VarMap& vm = map[j];
    cost[vm.pos] += p.objective[j] * vm.sign;
    if (vm.neg >= 0) cost[vm.neg] -= p.objective[j];
  }

  for (Eigen::Index i = 0; i < m; ++i) {
    if (rhs[i] < 0.0) {
      A.row(i) *= -1.0;
      rhs[i] = -rhs[i];
    }
  }

  // Slack columns with +1 coefficient seed the basis; other rows get artificials.
  std::vector<Eigen::Index> art_rows;
  std::vector<int> seed(m, -1);
  for (Eigen::Index i = 0; i < m_ineq; ++i) {
    if (A(i, nz + i) > 0.0) seed[i] = static_cast<int>(nz + i);
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    if (seed[i] < 0) art_rows.push_back(i);
  }
  const Eigen::Index n_art = static_cast<Eigen::Index>(art_rows.size());
  const Eigen::Index n_all = n_std + n_art;

  DenseMatrix Afull = DenseMatrix::Zero(m, n_all);
  Afull.leftCols(n_std) = A;
  for (Eigen::Index k = 0; k < n_art; ++k) {
    Afull(art_rows[k], n_std + k) = 1.0;
    seed[art_rows[k]] = static_cast<int>(n_std + k);
  }

  Tableau tab(Afull, rhs);
  for (Eigen::Index i = 0; i < m; ++i) tab.basis()[i] = seed[i];

  const int cap = 10 * static_cast<int>((m + n_all) * (m + n_all));
  LpSolution out;
  int pivots = 0;

  std::vector<bool> allowed(n_all, true);
  if (n_art > 0) {
    Vector phase1 = Vector::Zero(n_all);
    phase1.tail(n_art).setOnes();
    tab.set_costs(phase1);
    tab.optimize(allowed, pivots, cap);
    const double feas_tol = 1e-9 * (1.0 + rhs.norm());
    if (tab.objective_value() > feas_tol) {
      out.status = LpStatus::Infeasible;
      out.pivots = pivots;
      return out;
    }
    // Drive remaining artificials out of the basis or retire redundant rows.
    for (Eigen::Index r = 0; r < m; ++r) {
      if (tab.basis()[r] < n_std) continue;
      Eigen::Index col = -1;
      double best = 1e-9;
      for (Eigen::Index j = 0; j < n_std; ++j) {
        if (std::abs(tab.data()(r, j)) > best) {
          best = std::abs(tab.data()(r, j));
          col = j;
        }
      }
      if (col >= 0) {
        tab.pivot(r, col);
      } else {
        tab.live()[r] = false;
      }
    }
    for (Eigen::Index k = 0; k < n_art; ++k) allowed[n_std + k] = false;
  }

  Vector phase2 = Vector::Zero(n_all);
  phase2.head(n_std) = cost;
  tab.set_costs(phase2);
  const bool bounded = tab.optimize(allowed, pivots, cap);
  out.pivots = pivots;
  if (!bounded) {
    out.status = LpStatus::Unbounded;
    return out;
  }

  // Recompute the basic solution from the original data to shed pivoting error.
  std::vector<Eigen::Index> live_rows, basic_cols;
  for (Eigen::Index r = 0; r < m; ++r) {
    if (!tab.live()[r]) continue;
    live_rows.push_back(r);
    basic_cols.push_back(tab.basis()[r]);
  }
  Vector z = Vector::Zero(n_all);
  if (!live_rows.empty()) {
    DenseMatrix B(static_cast<Eigen::Index>(live_rows.size()),
                  static_cast<Eigen::Index>(basic_cols.size()));
    Vector bb(static_cast<Eigen::Index>(live_rows.size()));
    for (std::size_t i = 0; i < live_rows.size(); ++i) {
      bb[i] = rhs[live_rows[i]];
      for (std::size_t k = 0; k < basic_cols.size(); ++k) {
        B(i, k) = Afull(live_rows[i], basic_cols[k]);
      }
    }
    Vector zb = linalg::least_squares(B, bb);
    for (std::size_t k = 0; k < basic_cols.size(); ++k) {
      z[basic_cols[k]] = std::max(zb[k], 0.0);
    }
  }

  out.point.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const VarMap& vm = map[j];
    double v = vm.offset + vm.sign * z[vm.pos];
    if (vm.neg >= 0) v -= z[vm.neg];
    out.point[j] = v;
  }
  out.value = p.objective.dot(out.point);
  out.status = LpStatus::Optimal;
  return out;
}

double max_cone_step(const DenseMatrix& generators, const Vector& p, const Vector& v, double cap) {
  const Eigen::Index n = p.size();
  if (v.size() != n || (generators.rows() > 0 && generators.cols() != n)) {
    throw Error(ErrorCode::DimensionMismatch, "max_cone_step: dimensions");
  }
  if (!(cap >= 0.0)) throw Error(ErrorCode::InvalidArgument, "max_cone_step: negative cap");
  const Eigen::Index k = generators.rows();

  // Variables (t, mu_1..mu_k):  t v - G^T mu = -p,  t in [0, cap], mu >= 0.
  LinearProgram lp;
  lp.objective = Vector::Zero(k + 1);
  lp.objective[0] = -1.0;
  lp.E.resize(n, k + 1);
  lp.E.col(0) = v;
  if (k > 0) lp.E.rightCols(k) = -generators.transpose();
  lp.f = -p;
  lp.lower = Vector::Zero(k + 1);
  lp.upper = Vector::Constant(k + 1, kInf);
  lp.upper[0] = cap;

  const LpSolution sol = solve_lp(lp);
  if (sol.status == LpStatus::Infeasible) {
    throw Error(ErrorCode::InfeasibleContract,
                "max_cone_step: starting residual is not in the cone");
  }
  if (sol.status == LpStatus::Unbounded) return kInf;
  return std::clamp(sol.point[0], 0.0, cap);
}

double max_inface_lambda(const DenseMatrix& A_I, const Vector& x0, const Vector& w,
                         const Vector& x, double lambda_x, const Vector& dhat, double cap) {
  const Eigen::Index n = x0.size();
  if (w.size() != n || x.size() != n || dhat.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "max_inface_lambda: dimensions");
  }
  linalg::require_finite(x0, "max_inface_lambda: x0");
  linalg::require_finite(w, "max_inface_lambda: w");
  linalg::require_finite(x, "max_inface_lambda: x");
  linalg::require_finite(dhat, "max_inface_lambda: dhat");
  const Vector p = x0 - lambda_x * w - x;
  const Vector v = -(w + dhat);
  const double t_cap = std::isfinite(cap) ? std::max(cap - lambda_x, 0.0) : kInf;
  const double t = max_cone_step(A_I, p, v, t_cap);
  return t >= t_cap ? std::max(cap, lambda_x) : lambda_x + t;
}

}  // namespace shadowcg::lp
