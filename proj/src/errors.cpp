#include "ehaoi/errors.hpp"

namespace ehaoi {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidStochasticMatrix: return "InvalidStochasticMatrix";
    case ErrorKind::kNegativeQuantity: return "NegativeQuantity";
    case ErrorKind::kOutOfRange: return "OutOfRange";
    case ErrorKind::kShapeMismatch: return "ShapeMismatch";
    case ErrorKind::kEmptyModeList: return "EmptyModeList";
    case ErrorKind::kInfeasibleInstance: return "InfeasibleInstance";
    case ErrorKind::kConfigParse: return "ConfigParse";
    case ErrorKind::kStateSpaceTooLarge: return "StateSpaceTooLarge";
    case ErrorKind::kNotConverged: return "NotConverged";
    case ErrorKind::kDiverged: return "Diverged";
    case ErrorKind::kTooManyPolicies: return "TooManyPolicies";
    case ErrorKind::kEmptyKernel: return "EmptyKernel";
    case ErrorKind::kInfeasibleAction: return "InfeasibleAction";
    case ErrorKind::kInfeasiblePolicyAction: return "InfeasiblePolicyAction";
    case ErrorKind::kMultipleRecurrentClasses: return "MultipleRecurrentClasses";
    case ErrorKind::kSingularSystem: return "SingularSystem";
    case ErrorKind::kPeriodicChain: return "PeriodicChain";
  }
  return "Unknown";
}

ErrorCategory category_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidStochasticMatrix:
    case ErrorKind::kNegativeQuantity:
    case ErrorKind::kOutOfRange:
    case ErrorKind::kShapeMismatch:
    case ErrorKind::kEmptyModeList:
    case ErrorKind::kInfeasibleInstance:
    case ErrorKind::kConfigParse:
    case ErrorKind::kStateSpaceTooLarge:
      return ErrorCategory::kValidation;
    case ErrorKind::kNotConverged:
    case ErrorKind::kDiverged:
    case ErrorKind::kTooManyPolicies:
    case ErrorKind::kEmptyKernel:
      return ErrorCategory::kSolver;
    default:
      return ErrorCategory::kStructural;
  }
}

namespace {

std::string join_violations(const std::vector<Violation>& violations) {
  std::string out;
  for (const auto& v : violations) {
    if (!out.empty()) out += "; ";
    out += std::string(to_string(v.kind)) + ": " + v.message;
  }
  return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<Violation> violations)
    : Error(violations.empty() ? ErrorKind::kConfigParse : violations.front().kind,
            join_violations(violations)),
      violations_(std::move(violations)) {}

}  // namespace ehaoi
