#include "cwtloc/error.hpp"

namespace cwtloc {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::GridMismatch: return "grid_mismatch";
    case ErrorCode::ZeroInput: return "zero_input";
    case ErrorCode::Domain: return "domain";
    case ErrorCode::Constraint: return "constraint";
    case ErrorCode::Degenerate: return "degenerate";
    case ErrorCode::Truncation: return "truncation";
    case ErrorCode::Config: return "config";
    case ErrorCode::Io: return "io";
    case ErrorCode::Internal: return "internal";
  }
  return "unknown";
}

}  // namespace cwtloc
