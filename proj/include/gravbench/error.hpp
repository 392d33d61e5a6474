#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gravbench {

enum class ErrorCode {
  validation,
  singularity,
  contract_violation,
  singularity_approach,
  integration_failure,
  insufficient_coverage,
  not_found,
  window,
  cap,
  exhausted,
  protocol,
  binding,
  exclusion,
  ambiguity,
  conditioning,
  signal_absent,
  unit,
  format,
  episode_closed,
  timeout,
  io,
};

/// Stable lower_snake name used on the wire and in transcripts.
std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code),
        detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

/// Integration blow-up; carries the last time at which the state was valid.
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& detail, double last_valid_time)
      : Error(ErrorCode::integration_failure, detail), last_valid_time_(last_valid_time) {}

  double last_valid_time() const noexcept { return last_valid_time_; }

 private:
  double last_valid_time_;
};

}  // namespace gravbench
