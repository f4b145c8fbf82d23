#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "bench_app.hpp"
#include "shadowcg/error.hpp"
#include "shadowcg/io.hpp"
#include "support.hpp"

using namespace shadowcg;
namespace fs = std::filesystem;
using testsupport::vec;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("shadowbench_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(std::vector<std::string> args, std::string* out = nullptr, std::string* err = nullptr) {
  std::ostringstream o, e;
  const int code = shadowbench::run_cli(args, o, e);
  if (out) *out = o.str();
  if (err) *err = e.str();
  return code;
}

std::vector<std::string> listing(const fs::path& dir) {
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir)) names.push_back(entry.path().filename().string());
  std::sort(names.begin(), names.end());
  return names;
}

const char* kTriangle = R"({"kind": "generic", "A": [[-1, 0], [0, -1], [1, 1]], "b": [0, 0, 1]})";

}  // namespace

TEST_CASE("polytope json round trips") {
  const Polytope shapes[] = {
      testsupport::triangle(),
      Polytope::box(vec({0, -1}), vec({1, 2})),
      Polytope::simplex(3),
      Polytope::l1_ball(4, 2.5),
      make_flow_polytope(layered_dag(2, 2)),
  };
  for (const Polytope& P : shapes) {
    std::ostringstream out;
    write_polytope(out, P);
    const Polytope Q = polytope_from_json_text(out.str());
    CHECK(Q.kind() == P.kind());
    CHECK(Q.dim() == P.dim());
    CHECK(Q.A() == P.A());
    CHECK(Q.b() == P.b());
    CHECK(Q.radius() == P.radius());
  }
}

TEST_CASE("instance json round trips") {
  const Instance inst = make_flow_quadratic(2, 2, 3);
  std::ostringstream out;
  write_instance(out, inst);
  const Instance back = instance_from_json_text(out.str(), "copy");
  CHECK(back.objective.Q == inst.objective.Q);
  CHECK(back.objective.c == inst.objective.c);
  CHECK(back.x0 == inst.x0);
  CHECK(back.name == "copy");
}

TEST_CASE("malformed json is rejected") {
  for (const char* text : {"{", "[1, 2]", R"({"kind": "cube"})", R"({"A": [[1, 0], [1]], "b": [1, 1]})",
                           R"({"kind": "l1", "dim": 2})", R"({"kind": 3})", R"({"kind": "simplex", "dim": 1.5})"}) {
    CHECK_THROWS_AS(polytope_from_json_text(text), Error);
  }
  CHECK_THROWS_AS(instance_from_json_text(kTriangle, "t"), Error);
  CHECK_THROWS_AS(instance_from_json_text(
                      R"({"A": [[-1, 0], [0, -1], [1, 1]], "b": [0, 0, 1],
                          "objective": {"Q": [[1, 0], [0, 1]], "c": [0, 0]}, "x0": [2, 2]})",
                      "t"),
                  Error);
}

TEST_CASE("instance specs") {
  CHECK(shadowbench::instance_from_spec("lasso:20x40:s10", 1).polytope.dim() == 40);
  CHECK(shadowbench::instance_from_spec("lasso:5x6:s2:r3", 1).polytope.radius() == 3.0);
  CHECK(shadowbench::instance_from_spec("flow:2x3", 1).polytope.kind() == PolytopeKind::Flow);
  CHECK_THROWS_AS(shadowbench::instance_from_spec("lasso:20:s10", 1), Error);
  CHECK_THROWS_AS(shadowbench::instance_from_spec("file:/nonexistent.json", 1), Error);
}

TEST_CASE("bench writes one csv per solver plus plots") {
  const fs::path dir = scratch("bench");
  std::string out, err;
  const int code = cli({"bench", "--instance", "lasso:20x40:s10", "--solvers", "shadow-cg,afw,pgd", "--eps", "1e-8",
                        "--max-iters", "30", "--out", dir.string()},
                       &out, &err);
  CHECK(code == 0);
  CHECK(listing(dir) == std::vector<std::string>{
                            "lasso_20x40_s10_afw.csv", "lasso_20x40_s10_dualgap_vs_iter.svg",
                            "lasso_20x40_s10_gap_vs_iter.svg", "lasso_20x40_s10_gap_vs_time.svg",
                            "lasso_20x40_s10_pgd.csv", "lasso_20x40_s10_shadow-cg.csv",
                            "lasso_20x40_s10_shadow_calls.svg"});
  const std::string csv = slurp(dir / "lasso_20x40_s10_pgd.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 32);
  const std::string svg = slurp(dir / "lasso_20x40_s10_gap_vs_iter.svg");
  CHECK(svg.find("width=\"960\" height=\"600\"") != std::string::npos);
}

TEST_CASE("bench from a file instance") {
  const fs::path dir = scratch("file");
  write(dir / "tri.json", R"({"kind": "generic", "A": [[-1, 0], [0, -1], [1, 1]], "b": [0, 0, 1],
                              "objective": {"Q": [[1, 0], [0, 1]], "c": [-1, -0.5]}, "x0": [0, 0]})");
  const fs::path out = dir / "runs";
  CHECK(cli({"bench", "--instance", "file:" + (dir / "tri.json").string(), "--solvers", "shadow-walk", "--out",
             out.string(), "--no-plot"}) == 0);
  CHECK(listing(out) == std::vector<std::string>{"tri_shadow-walk.csv"});
}

TEST_CASE("bench config errors exit 2") {
  std::string err;
  CHECK(cli({"bench", "--instance", "lasso:20x40:s10"}, nullptr, &err) == 2);
  CHECK(err.find("--out") != std::string::npos);
  const fs::path dir = scratch("errors");
  CHECK(cli({"bench", "--instance", "lasso:bad", "--out", dir.string()}) == 2);
  CHECK(cli({"bench", "--instance", "flow:2x2", "--solvers", "newton", "--out", dir.string()}) == 2);
  CHECK(cli({"bench", "--instance", "flow:2x2", "--eps", "-1", "--out", dir.string()}) == 2);
  CHECK(cli({"bench", "--bogus"}) == 2);
  CHECK(cli({}) == 2);
}

TEST_CASE("bench solver errors exit 3") {
  const fs::path dir = scratch("solver_error");
  // A linear objective has L = 0, which PGD rejects.
  write(dir / "lin.json", R"({"kind": "box", "lower": [0, 0], "upper": [1, 1],
                              "objective": {"Q": [[0, 0], [0, 0]], "c": [1, 1]}, "x0": [1, 1]})");
  std::string err;
  CHECK(cli({"bench", "--instance", "file:" + (dir / "lin.json").string(), "--solvers", "pgd", "--out",
             (dir / "runs").string()},
            nullptr, &err) == 3);
  CHECK_FALSE(err.empty());
}

TEST_CASE("bench config file; flags win") {
  const fs::path dir = scratch("config");
  write(dir / "cfg.json", R"({"instance": "flow:2x2", "solvers": ["afw"], "max_iters": 5,
                              "out": ")" + (dir / "from_file").string() + R"(", "plot": false, "no_time": true})");
  CHECK(cli({"bench", "--config", (dir / "cfg.json").string(), "--solvers", "fw"}) == 0);
  CHECK(listing(dir / "from_file") == std::vector<std::string>{"flow_2x2_fw.csv"});
  CHECK(cli({"bench", "--config", (dir / "missing.json").string()}) == 2);
}

TEST_CASE("bench output is deterministic without timings") {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  for (const fs::path& d : {a, b}) {
    CHECK(cli({"bench", "--instance", "flow:3x3", "--solvers", "shadow-cg,shadow-cg2,pfw", "--max-iters", "100",
               "--no-time", "--out", d.string()}) == 0);
  }
  for (const std::string& name : listing(a)) CHECK(slurp(a / name) == slurp(b / name));
}

TEST_CASE("curve subcommand") {
  const fs::path dir = scratch("curve");
  write(dir / "tri.json", kTriangle);
  std::string out;
  CHECK(cli({"curve", "--polytope", (dir / "tri.json").string(), "--x0", "0.2,0.2", "--w", "0,1", "--out",
             (dir / "c").string()},
            &out) == 0);
  const std::string csv = slurp(dir / "c" / "curve.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK(fs::exists(dir / "c" / "curve.svg"));

  CHECK(cli({"curve", "--polytope", (dir / "tri.json").string(), "--x0", "0.5,0.5", "--w", "-1,-1", "--out",
             (dir / "d").string()}) == 0);
  const std::string one = slurp(dir / "d" / "curve.csv");
  CHECK(std::count(one.begin(), one.end(), '\n') == 2);

  write(dir / "cube.json", R"({"kind": "box", "lower": [0, 0, 0], "upper": [1, 1, 1]})");
  CHECK(cli({"curve", "--polytope", (dir / "cube.json").string(), "--x0", "0.5,0.5,0.5", "--w", "1,2,3", "--out",
             (dir / "e").string()},
            &out) == 0);
  CHECK(out.find("SVG skipped") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "e" / "curve.svg"));

  CHECK(cli({"curve", "--polytope", (dir / "tri.json").string(), "--x0", "0.2", "--w", "0,1", "--out",
             (dir / "f").string()}) == 2);
}
