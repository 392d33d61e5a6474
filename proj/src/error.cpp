#include "gravbench/error.hpp"

namespace gravbench {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::validation: return "validation";
    case ErrorCode::singularity: return "singularity";
    case ErrorCode::contract_violation: return "contract_violation";
    case ErrorCode::singularity_approach: return "singularity_approach";
    case ErrorCode::integration_failure: return "integration_failure";
    case ErrorCode::insufficient_coverage: return "insufficient_coverage";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::window: return "window";
    case ErrorCode::cap: return "cap";
    case ErrorCode::exhausted: return "exhausted";
    case ErrorCode::protocol: return "protocol";
    case ErrorCode::binding: return "binding";
    case ErrorCode::exclusion: return "exclusion";
    case ErrorCode::ambiguity: return "ambiguity";
    case ErrorCode::conditioning: return "conditioning";
    case ErrorCode::signal_absent: return "signal_absent";
    case ErrorCode::unit: return "unit";
    case ErrorCode::format: return "format";
    case ErrorCode::episode_closed: return "episode_closed";
    case ErrorCode::timeout: return "timeout";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

}  // namespace gravbench
