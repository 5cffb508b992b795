#pragma once

// The eleven acceptance criteria, runnable from the command line and from
// the test suite.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace gammastab::cli {

enum class RowStatus { kPass, kFail, kWarn };

struct CriterionResult {
  int id = 0;
  std::string title;
  RowStatus status = RowStatus::kFail;
  std::string detail;
  double seconds = 0.0;

  bool passed() const { return status == RowStatus::kPass; }
};

struct AcceptanceOptions {
  /// Fewer random instances in criteria 5 to 10.
  bool quick = false;
  std::uint64_t seed = 1;
  /// Agents run at w sampled uniformly in [-w_scale, w_scale] per entry in
  /// criterion 4. Failures there become warnings when w_scale > 0.
  double w_scale = 0.0;
  /// Called as each row finishes.
  std::function<void(const CriterionResult&)> on_result;
};

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts);

/// "[PASS] 1 title: detail (0.01 s)".
std::string format_row(const CriterionResult& row);

}  // namespace gammastab::cli
