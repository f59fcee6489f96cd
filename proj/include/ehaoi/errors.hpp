#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ehaoi {

enum class ErrorKind {
  // configuration / validation
  kInvalidStochasticMatrix,
  kNegativeQuantity,
  kOutOfRange,
  kShapeMismatch,
  kEmptyModeList,
  kInfeasibleInstance,
  kConfigParse,
  kStateSpaceTooLarge,
  // solver
  kNotConverged,
  kDiverged,
  kTooManyPolicies,
  kEmptyKernel,
  // structural
  kInfeasibleAction,
  kInfeasiblePolicyAction,
  kMultipleRecurrentClasses,
  kSingularSystem,
  kPeriodicChain,
};

std::string_view to_string(ErrorKind kind);

/// Coarse classification used for process exit codes.
enum class ErrorCategory { kValidation = 1, kSolver = 2, kStructural = 3 };

ErrorCategory category_of(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  ErrorCategory category() const noexcept { return category_of(kind_); }

 private:
  ErrorKind kind_;
};

struct Violation {
  ErrorKind kind;
  std::string message;
};

/// Raised by config validation; carries every violation found, not only the first.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<Violation> violations);

  const std::vector<Violation>& violations() const noexcept { return violations_; }

 private:
  std::vector<Violation> violations_;
};

}  // namespace ehaoi
