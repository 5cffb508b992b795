#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gammastab {

/// Failure categories raised by the library. The command-line tool maps
/// these onto its exit codes.
enum class ErrorKind {
  kInvalidInput,
  kNoUniqueSolution,
  kNumericalFailure,
  kInfeasible,
  kAssumptionViolation,
  kTransmissionZero,
  kSynthesisFailure,
  kDesignRejection,
  kInternalConsistency,
  kDivergence,
  kNoFrequency,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace gammastab
