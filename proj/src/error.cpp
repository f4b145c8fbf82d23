#include "shadowcg/error.hpp"

namespace shadowcg {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::IterationCap: return "IterationCap";
    case ErrorCode::NumericalStall: return "NumericalStall";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::InfeasibleContract: return "InfeasibleContract";
    case ErrorCode::Unbounded: return "Unbounded";
    case ErrorCode::OffCurve: return "OffCurve";
    case ErrorCode::CapExceeded: return "CapExceeded";
    case ErrorCode::NotADag: return "NotADag";
    case ErrorCode::Disconnected: return "Disconnected";
    case ErrorCode::UnsupportedPolytope: return "UnsupportedPolytope";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace shadowcg
