#include "shadowcg/io.hpp"

#include <json.hpp>
#include <sstream>

#include "shadowcg/error.hpp"

namespace shadowcg {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::InvalidArgument, "json: " + what); }

const json& field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) bad(std::string("missing \"") + key + "\"");
  return *it;
}

double number(const json& j, const char* what) {
  if (!j.is_number()) bad(std::string(what) + " is not a number");
  return j.get<double>();
}

int count(const json& j, const char* what) {
  if (!j.is_number_integer()) bad(std::string(what) + " is not an integer");
  return j.get<int>();
}

Vector vector_of(const json& j, const char* what) {
  if (!j.is_array()) bad(std::string(what) + " is not an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = number(j[i], what);
  return v;
}

DenseMatrix matrix_of(const json& j, const char* what) {
  if (!j.is_array() || j.empty()) bad(std::string(what) + " is not a non-empty array of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  DenseMatrix M(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    const Vector row = vector_of(j[i], what);
    if (static_cast<std::size_t>(row.size()) != cols) bad(std::string(what) + " has ragged rows");
    M.row(static_cast<Eigen::Index>(i)) = row.transpose();
  }
  return M;
}

json to_json(const Vector& v) {
  json j = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

json to_json(const DenseMatrix& M) {
  json j = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) j.push_back(to_json(Vector(M.row(i).transpose())));
  return j;
}

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    bad(e.what());
  }
}

std::string slurp(std::istream& in) {
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Polytope polytope_from(const json& j) {
  if (!j.is_object()) bad("polytope is not an object");
  if (j.contains("kind") && !j["kind"].is_string()) bad("kind is not a string");
  const std::string kind = j.contains("kind") ? j["kind"].get<std::string>() : "generic";
  if (kind == "generic") return Polytope::generic(matrix_of(field(j, "A"), "A"), vector_of(field(j, "b"), "b"));
  if (kind == "box") return Polytope::box(vector_of(field(j, "lower"), "lower"), vector_of(field(j, "upper"), "upper"));
  if (kind == "simplex") return Polytope::simplex(count(field(j, "dim"), "dim"));
  if (kind == "l1") return Polytope::l1_ball(count(field(j, "dim"), "dim"), number(field(j, "radius"), "radius"));
  if (kind == "flow") {
    FlowGraph g;
    g.nodes = count(field(j, "nodes"), "nodes");
    g.source = count(field(j, "source"), "source");
    g.sink = count(field(j, "sink"), "sink");
    const json& edges = field(j, "edges");
    if (!edges.is_array()) bad("edges is not an array");
    for (const json& e : edges) {
      if (!e.is_array() || e.size() != 2) bad("edge is not a pair");
      g.edges.emplace_back(count(e[0], "edge"), count(e[1], "edge"));
    }
    return make_flow_polytope(g);
  }
  bad("unknown kind \"" + kind + "\"");
}

json polytope_json(const Polytope& P) {
  json j;
  switch (P.kind()) {
    case PolytopeKind::Generic:
      j["kind"] = "generic";
      j["A"] = to_json(P.A());
      j["b"] = to_json(P.b());
      break;
    case PolytopeKind::Box:
      j["kind"] = "box";
      j["lower"] = to_json(P.lower_bounds());
      j["upper"] = to_json(P.upper_bounds());
      break;
    case PolytopeKind::Simplex:
      j["kind"] = "simplex";
      j["dim"] = P.dim();
      break;
    case PolytopeKind::L1Ball:
      j["kind"] = "l1";
      j["dim"] = P.dim();
      j["radius"] = P.radius();
      break;
    case PolytopeKind::Flow: {
      const FlowGraph& g = *P.flow();
      j["kind"] = "flow";
      j["nodes"] = g.nodes;
      j["source"] = g.source;
      j["sink"] = g.sink;
      j["edges"] = json::array();
      for (const auto& [u, v] : g.edges) j["edges"].push_back({u, v});
      break;
    }
  }
  return j;
}

}  // namespace

Polytope polytope_from_json_text(const std::string& text) { return polytope_from(parse(text)); }

Polytope read_polytope(std::istream& in) { return polytope_from_json_text(slurp(in)); }

Instance instance_from_json_text(const std::string& text, const std::string& name) {
  const json j = parse(text);
  Polytope P = polytope_from(j);
  const json& obj = field(j, "objective");
  DenseMatrix Q = matrix_of(field(obj, "Q"), "Q");
  Vector c = vector_of(field(obj, "c"), "c");
  const double constant = obj.contains("constant") ? number(obj["constant"], "constant") : 0.0;
  if (Q.rows() != P.dim() || Q.cols() != P.dim() || c.size() != P.dim()) bad("objective dimension");
  Vector x0 = j.contains("x0") ? vector_of(j["x0"], "x0") : lo_oracle(P, Vector::Ones(P.dim()));
  if (x0.size() != P.dim()) bad("x0 dimension");
  if (max_violation(P, x0) > kActiveTol * (1.0 + x0.lpNorm<Eigen::Infinity>())) bad("x0 is infeasible");
  QuadraticObjective f = QuadraticObjective::make(std::move(Q), std::move(c), constant);
  return Instance{std::move(P), std::move(f), std::move(x0), 0, name};
}

Instance read_instance(std::istream& in, const std::string& name) { return instance_from_json_text(slurp(in), name); }

void write_polytope(std::ostream& out, const Polytope& P) { out << polytope_json(P).dump(2) << '\n'; }

void write_instance(std::ostream& out, const Instance& inst) {
  json j = polytope_json(inst.polytope);
  j["objective"] = {{"Q", to_json(inst.objective.Q)}, {"c", to_json(inst.objective.c)}, {"constant", inst.objective.constant}};
  j["x0"] = to_json(inst.x0);
  out << j.dump(2) << '\n';
}

}  // namespace shadowcg
