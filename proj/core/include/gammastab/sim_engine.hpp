#pragma once

// Fixed-step RK4 simulation of LTI systems and trajectory metrics.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "gammastab/matrix_core.hpp"

namespace gammastab {

enum class Stepper {
  kRk4,
  /// Exact zero-input step e^{A dt}; only for models without an input signal.
  kExponential,
};

struct SimConfig {
  double dt = 1e-3;
  double horizon = 120.0;
  std::uint64_t seed = 0;
  /// Keep every k-th sample in the trace.
  Index record_every = 1;
  Stepper stepper = Stepper::kRk4;

  /// Throws kInvalidInput unless dt > 0, horizon >= 10 dt, record_every >= 1.
  void validate() const;
  Index steps() const;
};

struct Trace {
  std::vector<double> t;
  /// One row per recorded sample.
  Mat outputs;
  Mat states;
  std::vector<std::string> output_names;
  /// Agents in the trace and outputs per agent (agents == 1 for a single
  /// system).
  Index agents = 1;
  Index outputs_per_agent = 0;
  std::uint64_t seed = 0;
  std::string description;
  Vec final_state;

  /// Output of agent i at sample k.
  Vec agent_output(Index i, Index k) const;
};

/// x' = A x + B g(t), y = C x. An empty C records the state, an empty g
/// makes the system autonomous. Throws kDivergence with the first bad
/// timestamp when the state stops being finite.
struct LtiModel {
  Mat A;
  Mat B;
  Mat C;
};
using InputSignal = std::function<Vec(double)>;

Trace integrate(const LtiModel& model, const Vec& x0, const SimConfig& config,
                const InputSignal& input = {}, bool keep_states = false);

/// One RK4 step of x' = A x as a matrix: I + hA + (hA)^2/2 + (hA)^3/6 + (hA)^4/24.
Mat rk4_step_matrix(const Mat& a, double h);

/// Largest pairwise output distance over the trailing fraction of the trace.
double sync_error(const Trace& trace, double tail_fraction = 0.25);

/// Largest output norm over the trailing fraction of the trace.
double tail_amplitude(const Trace& trace, double tail_fraction = 0.25);

/// Angular frequency of the best a sin(wt) + b cos(wt) + c fit. Throws
/// kNoFrequency for a flat signal.
double dominant_frequency(const std::vector<double>& signal, double dt,
                          double flat_tol = 1e-8);

/// Column k of the trace outputs over its trailing fraction.
std::vector<double> tail_signal(const Trace& trace, Index column,
                                double tail_fraction = 0.25);

/// Header t, then output columns, then state columns when present.
void write_csv(std::ostream& os, const Trace& trace, bool with_states = false);

/// Two-column (t, value) text for one output channel.
void write_gnuplot_column(std::ostream& os, const Trace& trace, Index column);

}  // namespace gammastab
