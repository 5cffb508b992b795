#include "gammastab_cli/exit_codes.hpp"

namespace gammastab::cli {

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput:
      return kExitInput;
    case ErrorKind::kAssumptionViolation:
    case ErrorKind::kTransmissionZero:
      return kExitAssumption;
    case ErrorKind::kDesignRejection:
      return kExitSmallGain;
    case ErrorKind::kNoUniqueSolution:
    case ErrorKind::kNumericalFailure:
    case ErrorKind::kInfeasible:
    case ErrorKind::kSynthesisFailure:
    case ErrorKind::kInternalConsistency:
    case ErrorKind::kDivergence:
    case ErrorKind::kNoFrequency:
      return kExitSynthesis;
  }
  return kExitSynthesis;
}

}  // namespace gammastab::cli
