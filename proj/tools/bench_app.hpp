#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "shadowcg/problems.hpp"

namespace shadowbench {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolver = 3;

/// lasso:RxC:sK[:rRADIUS], flow:LxW or file:path.json. Throws
/// shadowcg::Error(InvalidArgument) on a malformed spec.
shadowcg::Instance instance_from_spec(const std::string& spec, std::uint64_t seed);

/// Entry point of the shadowbench tool: subcommands bench and curve.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace shadowbench
