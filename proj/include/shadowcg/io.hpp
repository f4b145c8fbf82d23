#pragma once

#include <istream>
#include <ostream>
#include <string>

#include "shadowcg/problems.hpp"

namespace shadowcg {

/// JSON polytope, selected by "kind" (default "generic"):
///   generic {"A": [[...]], "b": [...]}
///   box     {"lower": [...], "upper": [...]}
///   simplex {"dim": n}
///   l1      {"dim": n, "radius": r}
///   flow    {"nodes": k, "edges": [[u, v], ...], "source": s, "sink": t}
/// Throws InvalidArgument on malformed input.
Polytope read_polytope(std::istream& in);
Polytope polytope_from_json_text(const std::string& text);

/// Polytope fields plus "objective": {"Q": [[...]], "c": [...], "constant": k}
/// and an optional "x0" (default: LO vertex for the all-ones direction).
Instance read_instance(std::istream& in, const std::string& name);
Instance instance_from_json_text(const std::string& text, const std::string& name);

void write_polytope(std::ostream& out, const Polytope& P);
void write_instance(std::ostream& out, const Instance& inst);

}  // namespace shadowcg
