#pragma once

#include <stdexcept>
#include <string>

namespace axy {

/// Failure categories. The CLI maps these onto process exit codes.
enum class ErrorKind {
  invalid_argument,
  config,
  unaddressable_spin,
  unreachable_coefficient,
  solver_failed,
  overlap,
  resonance_mismatch,
  infeasible_target,
  domain,
  dimension,
  uncalibratable,
  degenerate_code,
  numerical,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid argument";
    case ErrorKind::config: return "config error";
    case ErrorKind::unaddressable_spin: return "unaddressable spin";
    case ErrorKind::unreachable_coefficient: return "unreachable coefficient";
    case ErrorKind::solver_failed: return "solver failed";
    case ErrorKind::overlap: return "overlap";
    case ErrorKind::resonance_mismatch: return "resonance mismatch";
    case ErrorKind::infeasible_target: return "infeasible target";
    case ErrorKind::domain: return "domain error";
    case ErrorKind::dimension: return "dimension mismatch";
    case ErrorKind::uncalibratable: return "uncalibratable";
    case ErrorKind::degenerate_code: return "degenerate code";
    case ErrorKind::numerical: return "numerical failure";
  }
  return "error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace axy
