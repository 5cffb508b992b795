#pragma once

#include "gammastab/errors.hpp"

namespace gammastab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitAssumption = 2;
inline constexpr int kExitSynthesis = 3;
inline constexpr int kExitSmallGain = 4;
/// reproduce-example finished but some acceptance rows failed.
inline constexpr int kExitAcceptance = 5;

int exit_code_for(ErrorKind kind);

}  // namespace gammastab::cli
