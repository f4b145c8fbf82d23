#include "bench_app.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <regex>
#include <sstream>

#include "shadowcg/error.hpp"
#include "shadowcg/io.hpp"
#include "shadowcg/solvers.hpp"
#include "shadowcg/trace.hpp"
#include "svg_plot.hpp"

namespace shadowbench {

namespace fs = std::filesystem;
using shadowcg::Error;
using shadowcg::ErrorCode;
using shadowcg::Instance;
using shadowcg::Vector;

namespace {

struct BenchConfig {
  std::string instance;
  std::vector<std::string> solvers{"shadow-cg", "shadow-cg2", "afw", "pgd"};
  double eps = 1e-6;
  int max_iters = 1000;
  double c_param = 0.1;
  std::uint64_t seed = 1;
  std::string out;
  bool no_time = false;
  bool plot = true;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    if (!cur.empty()) parts.push_back(cur);
  }
  return parts;
}

Vector parse_vector(const std::string& s, const char* what) {
  const std::vector<std::string> parts = split(s, ',');
  Vector v(static_cast<Eigen::Index>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) {
    std::size_t used = 0;
    try {
      v[static_cast<Eigen::Index>(i)] = std::stod(parts[i], &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != parts[i].size()) throw Error(ErrorCode::InvalidArgument, std::string(what) + ": bad number '" + parts[i] + "'");
  }
  return v;
}

// Values from the JSON file fill every option the command line left unset.
void apply_config_file(const std::string& path, const CLI::App& cmd, BenchConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open config " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("config: ") + e.what());
  }
  auto unset = [&](const char* flag) { return cmd.get_option(flag)->count() == 0; };
  try {
    if (j.contains("instance") && unset("--instance")) cfg.instance = j["instance"].get<std::string>();
    if (j.contains("solvers") && unset("--solvers")) {
      cfg.solvers = j["solvers"].is_string() ? split(j["solvers"].get<std::string>(), ',')
                                             : j["solvers"].get<std::vector<std::string>>();
    }
    if (j.contains("eps") && unset("--eps")) cfg.eps = j["eps"].get<double>();
    if (j.contains("max_iters") && unset("--max-iters")) cfg.max_iters = j["max_iters"].get<int>();
    if (j.contains("c_param") && unset("--c-param")) cfg.c_param = j["c_param"].get<double>();
    if (j.contains("seed") && unset("--seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("out") && unset("--out")) cfg.out = j["out"].get<std::string>();
    if (j.contains("no_time") && unset("--no-time")) cfg.no_time = j["no_time"].get<bool>();
    if (j.contains("plot") && unset("--plot")) cfg.plot = j["plot"].get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("config: ") + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
  f << text;
}

template <class Fn>
void write_file(const fs::path& path, Fn&& body) {
  std::ostringstream ss;
  body(ss);
  write_text(path, ss.str());
}

void write_plots(const fs::path& dir, const std::string& stem, const std::vector<shadowcg::RunRecord>& runs,
                 bool with_time, std::ostream& out) {
  auto series = [&](auto&& xval, auto&& yval) {
    std::vector<Series> all;
    for (const auto& r : runs) {
      Series s{r.solver, {}, {}};
      for (const auto& row : r.rows) {
        s.x.push_back(xval(row));
        s.y.push_back(yval(row));
      }
      all.push_back(std::move(s));
    }
    return all;
  };
  auto iter = [](const shadowcg::IterationRow& r) { return static_cast<double>(r.iter); };
  auto pgap = [](const shadowcg::IterationRow& r) { return r.primal_gap; };

  write_file(dir / (stem + "_gap_vs_iter.svg"), [&](std::ostream& s) {
    write_line_plot(s, {stem + ": primal gap", "iteration", "f(x) - f*", true}, series(iter, pgap));
  });
  if (with_time) {
    write_file(dir / (stem + "_gap_vs_time.svg"), [&](std::ostream& s) {
      write_line_plot(s, {stem + ": primal gap", "seconds", "f(x) - f*", true},
                      series([](const shadowcg::IterationRow& r) { return r.seconds; }, pgap));
    });
  } else {
    out << "skipping " << stem << "_gap_vs_time.svg: timing disabled\n";
  }
  write_file(dir / (stem + "_dualgap_vs_iter.svg"), [&](std::ostream& s) {
    write_line_plot(s, {stem + ": duality gap", "iteration", "duality gap", true},
                    series(iter, [](const shadowcg::IterationRow& r) { return r.duality_gap; }));
  });
  write_file(dir / (stem + "_shadow_calls.svg"), [&](std::ostream& s) {
    write_line_plot(s, {stem + ": shadow oracle calls", "iteration", "calls per iteration", false},
                    series(iter, [](const shadowcg::IterationRow& r) { return static_cast<double>(r.shadow_calls); }));
  });
}

int run_bench(BenchConfig cfg, std::ostream& out, std::ostream& err) {
  if (cfg.out.empty()) {
    err << "bench: --out is required\n";
    return kExitConfig;
  }
  if (cfg.instance.empty()) {
    err << "bench: --instance is required\n";
    return kExitConfig;
  }
  if (cfg.solvers.empty()) {
    err << "bench: no solvers given\n";
    return kExitConfig;
  }
  const auto& known = shadowcg::solver_names();
  for (const std::string& s : cfg.solvers) {
    if (std::find(known.begin(), known.end(), s) == known.end()) {
      err << "bench: unknown solver '" << s << "'\n";
      return kExitConfig;
    }
  }
  shadowcg::SolverConfig sc;
  sc.epsilon = cfg.eps;
  sc.max_iters = cfg.max_iters;
  sc.c_param = cfg.c_param;
  sc.seed = cfg.seed;
  sc.record_time = !cfg.no_time;

  std::optional<Instance> loaded;
  try {
    sc.validate();
    loaded.emplace(instance_from_spec(cfg.instance, cfg.seed));
  } catch (const std::exception& e) {
    err << "bench: " << e.what() << '\n';
    return kExitConfig;
  }

  const Instance& inst = *loaded;
  const fs::path dir(cfg.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    err << "bench: cannot create output directory " << cfg.out << '\n';
    return kExitConfig;
  }

  std::vector<shadowcg::RunRecord> runs;
  try {
    sc.reference_value = shadowcg::reference_optimum(inst).value;
    for (const std::string& name : cfg.solvers) {
      runs.push_back(shadowcg::run_solver(name, inst, sc));
      const auto& r = runs.back();
      write_file(dir / (inst.name + "_" + name + ".csv"), [&](std::ostream& s) { write_run_csv(s, r); });
      out << name << ": " << r.iterations() << " iterations, duality gap " << r.last().duality_gap
          << (r.converged ? "" : " (not converged)") << '\n';
    }
  } catch (const std::exception& e) {
    err << "bench: solver failed: " << e.what() << '\n';
    return kExitSolver;
  }
  if (cfg.plot) {
    try {
      write_plots(dir, inst.name, runs, !cfg.no_time, out);
    } catch (const std::exception& e) {
      err << "bench: " << e.what() << '\n';
      return kExitConfig;
    }
  }
  return kExitOk;
}

// Vertices of a bounded 2-D polytope in counter-clockwise order.
std::vector<Point2> outline_2d(const shadowcg::Polytope& P) {
  shadowcg::DenseMatrix A;
  Vector b;
  if (P.explicit_rows()) {
    A = P.A();
    b = P.b();
  } else {
    std::tie(A, b) = P.l1_rows();
  }
  std::vector<Point2> pts;
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index k = i + 1; k < A.rows(); ++k) {
      Eigen::Matrix2d M;
      M << A(i, 0), A(i, 1), A(k, 0), A(k, 1);
      if (std::abs(M.determinant()) < 1e-12 * (1.0 + M.norm())) continue;
      const Eigen::Vector2d x = M.partialPivLu().solve(Eigen::Vector2d(b[i], b[k]));
      if (shadowcg::max_violation(P, Vector(x)) > 1e-9 * (1.0 + x.norm())) continue;
      const bool dup = std::any_of(pts.begin(), pts.end(), [&](const Point2& p) {
        return std::hypot(p[0] - x[0], p[1] - x[1]) <= 1e-9 * (1.0 + x.norm());
      });
      if (!dup) pts.push_back({x[0], x[1]});
    }
  }
  double cx = 0.0, cy = 0.0;
  for (const Point2& p : pts) {
    cx += p[0];
    cy += p[1];
  }
  if (!pts.empty()) {
    cx /= static_cast<double>(pts.size());
    cy /= static_cast<double>(pts.size());
  }
  std::sort(pts.begin(), pts.end(), [&](const Point2& a, const Point2& c) {
    return std::atan2(a[1] - cy, a[0] - cx) < std::atan2(c[1] - cy, c[0] - cx);
  });
  return pts;
}

int run_curve(const std::string& polytope_path, const std::string& x0_text, const std::string& w_text,
              const std::string& out_dir, std::ostream& out, std::ostream& err) {
  shadowcg::Polytope P = shadowcg::Polytope::simplex(1);
  Vector x0, w;
  try {
    std::ifstream in(polytope_path);
    if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open " + polytope_path);
    P = shadowcg::read_polytope(in);
    x0 = parse_vector(x0_text, "--x0");
    w = parse_vector(w_text, "--w");
    if (x0.size() != P.dim() || w.size() != P.dim()) {
      throw Error(ErrorCode::InvalidArgument, "--x0/--w dimension differs from the polytope");
    }
  } catch (const std::exception& e) {
    err << "curve: " << e.what() << '\n';
    return kExitConfig;
  }
  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    err << "curve: cannot create output directory " << out_dir << '\n';
    return kExitConfig;
  }
  shadowcg::ProjectionCurve curve;
  try {
    curve = shadowcg::trace_curve(P, x0, w);
  } catch (const std::exception& e) {
    err << "curve: " << e.what() << '\n';
    return kExitSolver;
  }
  write_file(dir / "curve.csv", [&](std::ostream& s) { write_curve_csv(s, curve); });
  out << "curve: " << curve.breakpoints.size() << " breakpoints\n";
  if (P.dim() == 2) {
    std::vector<Point2> pts;
    for (const auto& bp : curve.breakpoints) pts.push_back({bp.point[0], bp.point[1]});
    write_file(dir / "curve.svg", [&](std::ostream& s) { write_curve_plot(s, "projections curve", outline_2d(P), pts); });
  } else {
    out << "curve: SVG skipped, polytope is " << P.dim() << "-dimensional\n";
  }
  return kExitOk;
}

}  // namespace

Instance instance_from_spec(const std::string& spec, std::uint64_t seed) {
  std::smatch m;
  static const std::regex lasso(R"(lasso:(\d+)x(\d+):s(\d+)(?::r([0-9.eE+-]+))?)");
  static const std::regex flow(R"(flow:(\d+)x(\d+))");
  if (std::regex_match(spec, m, lasso)) {
    const double radius = m[4].matched ? std::stod(m[4].str()) : 0.0;
    return shadowcg::make_lasso(std::stoi(m[1].str()), std::stoi(m[2].str()), std::stoi(m[3].str()), radius, seed);
  }
  if (std::regex_match(spec, m, flow)) {
    return shadowcg::make_flow_quadratic(std::stoi(m[1].str()), std::stoi(m[2].str()), seed);
  }
  if (spec.rfind("file:", 0) == 0) {
    const fs::path path(spec.substr(5));
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open " + path.string());
    return shadowcg::read_instance(in, path.stem().string());
  }
  throw Error(ErrorCode::InvalidArgument, "bad instance spec '" + spec + "'");
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Benchmarks for projection-curve conditional gradient solvers", "shadowbench"};
  app.require_subcommand(1);

  BenchConfig cfg;
  std::string solvers_text;
  std::string config_path;
  CLI::App* bench = app.add_subcommand("bench", "Run solvers on one instance; write CSVs and SVG plots");
  bench->add_option("--instance", cfg.instance, "lasso:RxC:sK[:rRADIUS] | flow:LxW | file:path.json");
  bench->add_option("--solvers", solvers_text, "Comma-separated solver names");
  bench->add_option("--eps", cfg.eps, "Duality-gap tolerance");
  bench->add_option("--max-iters", cfg.max_iters, "Iteration cap");
  bench->add_option("--c-param", cfg.c_param, "Shadow-CG2 switch constant");
  bench->add_option("--seed", cfg.seed, "Instance seed");
  bench->add_option("--out", cfg.out, "Output directory");
  bench->add_flag("--no-time", cfg.no_time, "Write zero timings (deterministic output)");
  bench->add_flag("--plot,!--no-plot", cfg.plot, "Write SVG plots");
  bench->add_option("--config", config_path, "JSON file with defaults; command-line flags win");

  std::string polytope_path, x0_text, w_text, curve_out;
  CLI::App* curve = app.add_subcommand("curve", "Trace the projections curve of x0 - lambda w");
  curve->add_option("--polytope", polytope_path, "Polytope JSON file")->required();
  curve->add_option("--x0", x0_text, "Start point, comma-separated")->required();
  curve->add_option("--w", w_text, "Direction, comma-separated")->required();
  curve->add_option("--out", curve_out, "Output directory")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kExitConfig;
  }

  if (*curve) return run_curve(polytope_path, x0_text, w_text, curve_out, out, err);

  if (!solvers_text.empty()) cfg.solvers = split(solvers_text, ',');
  if (!config_path.empty()) {
    try {
      apply_config_file(config_path, *bench, cfg);
    } catch (const std::exception& e) {
      err << "bench: " << e.what() << '\n';
      return kExitConfig;
    }
  }
  return run_bench(cfg, out, err);
}

}  // namespace shadowbench
