#include "shadowcg/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "shadowcg/error.hpp"
#include "shadowcg/format.hpp"
#include "shadowcg/line_search.hpp"
#include "shadowcg/log.hpp"
#include "shadowcg/projection.hpp"
#include "shadowcg/shadow.hpp"
#include "shadowcg/trace.hpp"

namespace shadowcg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPruneWeight = 1e-12;

// Shared bookkeeping: one row per iterate, the duality gap from one LO call.
class Run {
 public:
  Run(const Instance& inst, const SolverConfig& cfg, const char* name)
      : inst_(inst), cfg_(cfg), start_(std::chrono::steady_clock::now()) {
    cfg.validate();
    rec_.solver = name;
    rec_.instance = inst.name;
  }

  const QuadraticObjective& f() const { return inst_.objective; }
  const Polytope& P() const { return inst_.polytope; }

  // Records x_t and returns true when the run should stop there.
  bool observe(int t, const Vector& x, Vector* grad, Vector* fw_vertex) {
    IterationRow row;
    row.iter = t;
    row.f = f().value(x);
    if (!std::isnan(cfg_.reference_value)) row.primal_gap = row.f - cfg_.reference_value;
    *grad = gradient(f(), x);
    *fw_vertex = lo_oracle(P(), *grad);
    row.lo_calls = 1;
    row.duality_gap = grad->dot(x - *fw_vertex);
    rec_.rows.push_back(row);
    if (cfg_.keep_iterates) rec_.iterates.push_back(x);
    const bool done = row.duality_gap <= cfg_.epsilon;
    if (done || t >= cfg_.max_iters) {
      rec_.converged = done;
      this->row().step = StepType::Stop;
      stamp();
      rec_.point = x;
      return true;
    }
    return false;
  }

  IterationRow& row() { return rec_.rows.back(); }

  // Ends the run at x without convergence.
  void stall(const Vector& x) {
    row().step = StepType::Stop;
    rec_.converged = false;
    rec_.point = x;
  }

  void stamp() {
    if (cfg_.record_time) {
      row().seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }
  }

  double line_search(const Vector& x, const Vector& d, double hi) const {
    if (!(hi > 0.0)) return 0.0;
    return golden_section(f().along(x, d), 0.0, hi, cfg_.line_search_tol);
  }

  double smooth_step(const Vector& grad, const Vector& d) const {
    const double curv = d.dot(f().Q * d);
    const double slope = -grad.dot(d);
    return curv > 0.0 ? slope / curv : kInf;
  }

  TraceOptOptions trace_options() const {
    TraceOptOptions o;
    o.use_L_early_exit = cfg_.use_L_early_exit;
    o.line_search_tol = cfg_.line_search_tol;
    return o;
  }

  RunRecord finish() {
    log_message(LogLevel::Info, rec_.solver + " on " + rec_.instance + ": " + std::to_string(rec_.iterations()) +
                                    " iterations, gap " + format_number(rec_.last().duality_gap));
    return std::move(rec_);
  }

  RunRecord& record() { return rec_; }
  const SolverConfig& cfg() const { return cfg_; }

 private:
  const Instance& inst_;
  const SolverConfig& cfg_;
  std::chrono::steady_clock::time_point start_;
  RunRecord rec_;
};

void fw_step(Run& run, Vector& x, const Vector& grad, const Vector& v) {
  const Vector d = v - x;
  IterationRow& row = run.row();
  row.step = StepType::FW;
  row.gamma_max = 1.0;
  row.gamma_smooth = run.smooth_step(grad, d);
  row.step_size = run.line_search(x, d, 1.0);
  x += row.step_size * d;
}

// Returns false when the tracer could not move x.
bool trace_step_into(Run& run, Vector& x, int reused_shadow) {
  const TraceOptResult r = trace_opt(run.P(), run.f(), x, run.trace_options());
  IterationRow& row = run.row();
  const bool moved = r.point != x;
  row.step = r.segments > 0 && r.in_face_steps == r.shadow_calls ? StepType::InFace : StepType::Shadow;
  row.shadow_calls = std::max(r.shadow_calls, reused_shadow);
  row.step_size = r.lambda;
  x = r.point;
  return moved;
}

enum class CgRule { Shadow, GradientNorm };

RunRecord shadow_cg_impl(const Instance& inst, const SolverConfig& cfg, CgRule rule, const char* name) {
  Run run(inst, cfg, name);
  Vector x = inst.x0;
  Vector grad, v;
  for (int t = 0;; ++t) {
    if (run.observe(t, x, &grad, &v)) break;
    const double gap = run.row().duality_gap;
    bool take_fw = false;
    int reused = 0;
    if (rule == CgRule::Shadow) {
      const ConeProjection cp = shadow(run.P(), x, grad);
      run.row().shadow_norm = cp.shadow.norm();
      take_fw = cp.shadow.norm() <= gap;
      reused = 1;
      if (take_fw) run.row().shadow_calls = 1;
    } else {
      take_fw = cfg.c_param * grad.norm() <= gap;
    }
    if (take_fw) {
      fw_step(run, x, grad, v);
    } else if (!trace_step_into(run, x, reused)) {
      // Near optimum the shadow can be rounding noise; fall back to FW.
      const int calls = run.row().shadow_calls;
      fw_step(run, x, grad, v);
      run.row().shadow_calls = calls;
    }
    run.stamp();
  }
  return run.finish();
}

int find_vertex(const ActiveVertexSet& s, const Vector& v) {
  for (std::size_t i = 0; i < s.vertices.size(); ++i) {
    if ((s.vertices[i] - v).norm() <= 1e-9 * (1.0 + v.norm())) return static_cast<int>(i);
  }
  return -1;
}

void prune(ActiveVertexSet& s) {
  ActiveVertexSet kept;
  double total = 0.0;
  for (std::size_t i = 0; i < s.vertices.size(); ++i) {
    if (s.weights[i] > kPruneWeight) {
      kept.vertices.push_back(std::move(s.vertices[i]));
      kept.weights.push_back(s.weights[i]);
      total += s.weights[i];
    }
  }
  for (double& w : kept.weights) w /= total;
  s = std::move(kept);
}

void add_weight(ActiveVertexSet& s, const Vector& v, double w) {
  const int i = find_vertex(s, v);
  if (i >= 0) {
    s.weights[static_cast<std::size_t>(i)] += w;
  } else {
    s.vertices.push_back(v);
    s.weights.push_back(w);
  }
}

}  // namespace

void SolverConfig::validate() const {
  if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "solver config: epsilon must be positive");
  if (!(c_param > 0.0 && c_param < 1.0)) throw Error(ErrorCode::InvalidArgument, "solver config: c_param must lie in (0,1)");
  if (max_iters < 0) throw Error(ErrorCode::InvalidArgument, "solver config: max_iters must be nonnegative");
  if (!(line_search_tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "solver config: line_search_tol must be positive");
}

const char* to_string(StepType type) {
  switch (type) {
    case StepType::FW: return "FW";
    case StepType::Shadow: return "Shadow";
    case StepType::InFace: return "InFace";
    case StepType::PGD: return "PGD";
    case StepType::Away: return "Away";
    case StepType::Pairwise: return "Pairwise";
    case StepType::Stop: return "Stop";
  }
  return "?";
}

Vector ActiveVertexSet::point() const {
  if (vertices.empty()) return Vector();
  Vector x = Vector::Zero(vertices.front().size());
  for (std::size_t i = 0; i < vertices.size(); ++i) x += weights[i] * vertices[i];
  return x;
}

int ActiveVertexSet::away_index(const Vector& g) const {
  int best = -1;
  double best_val = -kInf;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const double val = g.dot(vertices[i]);
    if (val > best_val) {
      best_val = val;
      best = static_cast<int>(i);
    }
  }
  return best;
}

int RunRecord::total_shadow_calls() const {
  int n = 0;
  for (const IterationRow& r : rows) n += r.shadow_calls;
  return n;
}

int RunRecord::total_lo_calls() const {
  int n = 0;
  for (const IterationRow& r : rows) n += r.lo_calls;
  return n;
}

RunRecord shadow_walk(const Instance& inst, const SolverConfig& cfg) {
  Run run(inst, cfg, "shadow-walk");
  Vector x = inst.x0;
  Vector grad, v;
  for (int t = 0;; ++t) {
    if (run.observe(t, x, &grad, &v)) break;
    const bool moved = trace_step_into(run, x, 0);
    run.stamp();
    if (!moved) {
      run.stall(x);
      break;
    }
  }
  return run.finish();
}

RunRecord shadow_cg(const Instance& inst, const SolverConfig& cfg) {
  return shadow_cg_impl(inst, cfg, CgRule::Shadow, "shadow-cg");
}

RunRecord shadow_cg2(const Instance& inst, const SolverConfig& cfg) {
  return shadow_cg_impl(inst, cfg, CgRule::GradientNorm, "shadow-cg2");
}

RunRecord pgd(const Instance& inst, const SolverConfig& cfg, PgdStep step) {
  Run run(inst, cfg, step == PgdStep::FixedInvL ? "pgd" : "pgd-ls");
  const double L = inst.objective.L;
  if (!(L > 0.0)) throw Error(ErrorCode::InvalidArgument, "pgd: objective must have L > 0");
  const Polytope& P = inst.polytope;
  Vector x = inst.x0;
  Vector grad, v;
  for (int t = 0;; ++t) {
    if (run.observe(t, x, &grad, &v)) break;
    IterationRow& row = run.row();
    row.step = StepType::PGD;
    double eta = 1.0 / L;
    Vector next = project(P, x - eta * grad, &x).point;
    if (step == PgdStep::LineSearchOnCurve) {
      auto phi = [&](double e) { return run.f().value(project(P, x - e * grad, &x).point); };
      const double e_star = golden_section(phi, 0.0, 2.0 / L, cfg.line_search_tol);
      const Vector cand = project(P, x - e_star * grad, &x).point;
      if (run.f().value(cand) < run.f().value(next)) {
        next = cand;
        eta = e_star;
      }
      row.gamma_max = 2.0 / L;
    }
    row.step_size = eta;
    x = std::move(next);
    run.stamp();
  }
  return run.finish();
}

RunRecord fw_variants(const Instance& inst, const SolverConfig& cfg, FwKind kind) {
  const char* name = kind == FwKind::Vanilla    ? "fw"
                     : kind == FwKind::AwayStep ? "afw"
                     : kind == FwKind::Pairwise ? "pfw"
                                                : "dicg";
  Run run(inst, cfg, name);
  const Polytope& P = inst.polytope;
  Vector x = inst.x0;
  ActiveVertexSet atoms;
  atoms.vertices.push_back(x);
  atoms.weights.push_back(1.0);
  Vector grad, v;
  for (int t = 0;; ++t) {
    if (run.observe(t, x, &grad, &v)) break;
    IterationRow& row = run.row();
    if (kind == FwKind::Vanilla) {
      fw_step(run, x, grad, v);
    } else if (kind == FwKind::DICG) {
      // Away vertex from the minimal face of x, so no decomposition is stored.
      const Vector a = lo_oracle_face(P, x, -grad);
      ++row.lo_calls;
      const Vector d = v - a;
      const double gmax = d.norm() > 0.0 ? max_step(P, x, d) : 0.0;
      if ((a - x).norm() <= 1e-12 * (1.0 + x.norm()) || !(gmax > 0.0)) {
        fw_step(run, x, grad, v);
      } else {
        row.step = StepType::Pairwise;
        row.gamma_max = gmax;
        row.gamma_smooth = run.smooth_step(grad, d);
        row.step_size = run.line_search(x, d, gmax);
        x += row.step_size * d;
      }
    } else {
      const int j = atoms.away_index(grad);
      const auto ju = static_cast<std::size_t>(j);
      const Vector a = atoms.vertices[ju];
      const double alpha = atoms.weights[ju];
      const Vector d_fw = v - x;
      const Vector d_away = x - a;
      if (kind == FwKind::AwayStep) {
        const bool fw = -grad.dot(d_fw) >= -grad.dot(d_away) || alpha >= 1.0 - 1e-15;
        if (fw) {
          row.step = StepType::FW;
          row.gamma_max = 1.0;
          row.gamma_smooth = run.smooth_step(grad, d_fw);
          const double g = run.line_search(x, d_fw, 1.0);
          row.step_size = g;
          for (double& w : atoms.weights) w *= 1.0 - g;
          add_weight(atoms, v, g);
          if (g >= 1.0) {
            atoms.vertices.assign(1, v);
            atoms.weights.assign(1, 1.0);
          }
        } else {
          const double gmax = alpha / (1.0 - alpha);
          row.step = StepType::Away;
          row.gamma_max = gmax;
          row.gamma_smooth = run.smooth_step(grad, d_away);
          const double g = run.line_search(x, d_away, gmax);
          row.step_size = g;
          for (double& w : atoms.weights) w *= 1.0 + g;
          atoms.weights[ju] -= g;
          if (g >= gmax) atoms.weights[ju] = 0.0;
        }
      } else {
        const Vector d = v - a;
        row.step = StepType::Pairwise;
        row.gamma_max = alpha;
        row.gamma_smooth = run.smooth_step(grad, d);
        const double g = run.line_search(x, d, alpha);
        row.step_size = g;
        atoms.weights[ju] -= g;
        if (g >= alpha) atoms.weights[ju] = 0.0;
        add_weight(atoms, v, g);
      }
      prune(atoms);
      x = atoms.point();
    }
    run.stamp();
  }
  RunRecord rec = run.finish();
  if (kind == FwKind::AwayStep || kind == FwKind::Pairwise) rec.atoms = std::move(atoms);
  return rec;
}

const std::vector<std::string>& solver_names() {
  static const std::vector<std::string> names = {"shadow-walk", "shadow-cg", "shadow-cg2", "pgd", "pgd-ls",
                                                 "fw",          "afw",       "pfw",        "dicg"};
  return names;
}

RunRecord run_solver(const std::string& name, const Instance& inst, const SolverConfig& cfg) {
  if (name == "shadow-walk") return shadow_walk(inst, cfg);
  if (name == "shadow-cg") return shadow_cg(inst, cfg);
  if (name == "shadow-cg2") return shadow_cg2(inst, cfg);
  if (name == "pgd") return pgd(inst, cfg, PgdStep::FixedInvL);
  if (name == "pgd-ls") return pgd(inst, cfg, PgdStep::LineSearchOnCurve);
  if (name == "fw") return fw_variants(inst, cfg, FwKind::Vanilla);
  if (name == "afw") return fw_variants(inst, cfg, FwKind::AwayStep);
  if (name == "pfw") return fw_variants(inst, cfg, FwKind::Pairwise);
  if (name == "dicg") return fw_variants(inst, cfg, FwKind::DICG);
  throw Error(ErrorCode::InvalidArgument, "unknown solver '" + name + "'");
}

ReferenceOptimum reference_optimum(const Instance& inst) {
  const Polytope& P = inst.polytope;
  const QuadraticObjective& f = inst.objective;
  ReferenceOptimum out;
  if (P.explicit_rows() || P.dim() <= 12) {
    out.point = solve_qp(P, f.Q, f.c, &inst.x0).point;
    out.value = f.value(out.point);
    return out;
  }
  // l1 ball: exact QP in the split variables x = u - v, u, v >= 0, sum(u + v) <= r.
  const Eigen::Index n = P.dim();
  DenseMatrix A = DenseMatrix::Zero(2 * n + 1, 2 * n);
  Vector b = Vector::Zero(2 * n + 1);
  A.topRows(2 * n) = -DenseMatrix::Identity(2 * n, 2 * n);
  A.row(2 * n).setOnes();
  b[2 * n] = P.radius();
  const Polytope lifted = Polytope::generic(A, b);
  DenseMatrix Q2(2 * n, 2 * n);
  Q2 << f.Q, -f.Q, -f.Q, f.Q;
  Vector c2(2 * n);
  c2 << f.c, -f.c;
  Vector start(2 * n);
  start << inst.x0.cwiseMax(0.0), (-inst.x0).cwiseMax(0.0);
  const Vector uv = solve_qp(lifted, Q2, c2, &start).point;
  out.point = uv.head(n) - uv.tail(n);
  out.value = f.value(out.point);
  return out;
}

void write_run_csv(std::ostream& out, const RunRecord& run) {
  out << "iter,f,primal_gap,duality_gap,step_type,shadow_calls,lo_calls,seconds\n";
  for (const IterationRow& r : run.rows) {
    out << r.iter << ',' << format_number(r.f) << ',' << (std::isnan(r.primal_gap) ? "" : format_number(r.primal_gap))
        << ',' << format_number(r.duality_gap) << ',' << to_string(r.step) << ',' << r.shadow_calls << ','
        << r.lo_calls << ',' << format_number(r.seconds) << '\n';
  }
}

}  // namespace shadowcg
