#pragma once

#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "shadowcg/problems.hpp"

namespace shadowcg {

struct SolverConfig {
  int max_iters = 1000;
  double epsilon = 1e-6;  // duality-gap stop
  double c_param = 0.1;   // Shadow-CG^2 switch constant
  bool use_L_early_exit = true;
  double line_search_tol = 1e-10;
  std::uint64_t seed = 0;
  /// f(x*) used for the primal_gap column; NaN leaves the column empty.
  double reference_value = std::numeric_limits<double>::quiet_NaN();
  bool record_time = true;
  bool keep_iterates = false;

  /// Throws InvalidArgument unless epsilon > 0, 0 < c_param < 1, max_iters >= 0.
  void validate() const;
};

enum class StepType { FW, Shadow, InFace, PGD, Away, Pairwise, Stop };

const char* to_string(StepType type);

/// One row per iterate x_t: its values and gaps, the step taken from it and the
/// oracle calls that step cost. The last row (step Stop) is the returned point.
struct IterationRow {
  int iter = 0;
  double f = 0.0;
  double primal_gap = std::numeric_limits<double>::quiet_NaN();
  double duality_gap = 0.0;
  StepType step = StepType::Stop;
  int shadow_calls = 0;
  int lo_calls = 0;
  double seconds = 0.0;
  double step_size = 0.0;
  double gamma_max = 0.0;
  /// Unconstrained minimizer of f along the step direction (FW-type steps).
  double gamma_smooth = 0.0;
  double shadow_norm = std::numeric_limits<double>::quiet_NaN();
};

struct ActiveVertexSet {
  std::vector<Vector> vertices;
  std::vector<double> weights;

  Vector point() const;
  /// Index of the vertex maximizing <g, v>.
  int away_index(const Vector& g) const;
};

struct RunRecord {
  std::string solver;
  std::string instance;
  std::vector<IterationRow> rows;
  Vector point;
  bool converged = false;
  ActiveVertexSet atoms;        // AFW / PFW only
  std::vector<Vector> iterates;  // x_0 .. x_T when keep_iterates

  /// Steps taken (rows minus the final Stop row).
  int iterations() const { return rows.empty() ? 0 : static_cast<int>(rows.size()) - 1; }
  int total_shadow_calls() const;
  int total_lo_calls() const;
  const IterationRow& last() const { return rows.back(); }
};

RunRecord shadow_walk(const Instance& inst, const SolverConfig& cfg);
RunRecord shadow_cg(const Instance& inst, const SolverConfig& cfg);
RunRecord shadow_cg2(const Instance& inst, const SolverConfig& cfg);

enum class PgdStep { FixedInvL, LineSearchOnCurve };
RunRecord pgd(const Instance& inst, const SolverConfig& cfg, PgdStep step = PgdStep::FixedInvL);

enum class FwKind { Vanilla, AwayStep, Pairwise, DICG };
RunRecord fw_variants(const Instance& inst, const SolverConfig& cfg, FwKind kind);

/// Runs a solver by its CLI name: shadow-walk, shadow-cg, shadow-cg2, pgd,
/// pgd-ls, fw, afw, pfw, dicg. Throws InvalidArgument for anything else.
RunRecord run_solver(const std::string& name, const Instance& inst, const SolverConfig& cfg);
const std::vector<std::string>& solver_names();

struct ReferenceOptimum {
  Vector point;
  double value = 0.0;
};

/// High-accuracy minimizer by the active-set QP; on the l1 ball the QP runs
/// in the split variables x = u - v.
ReferenceOptimum reference_optimum(const Instance& inst);

/// Header iter,f,primal_gap,duality_gap,step_type,shadow_calls,lo_calls,seconds.
void write_run_csv(std::ostream& out, const RunRecord& run);

}  // namespace shadowcg
