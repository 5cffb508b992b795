#pragma once

// Closed-loop simulation of the synchronization network and of the generic
// two-subsystem interconnection used by the small-gain argument.

#include <cstdint>
#include <vector>

#include "gammastab/gamma_synthesis.hpp"
#include "gammastab/mas_sync.hpp"
#include "gammastab/sim_engine.hpp"

namespace gammastab {

/// Layout of the stacked network state: agent i owns [x_i; controller_i].
struct NetworkLayout {
  std::vector<Index> agent_offset;
  std::vector<Index> plant_dim;
  std::vector<Index> controller_dim;
  Index total = 0;
};

NetworkLayout network_layout(const NetworkDesign& net);

/// Closed-loop matrix with every agent evaluated at its own w_i. An empty
/// vector selects w_i = 0.
Mat assemble_network_matrix(const NetworkDesign& net, const std::vector<Vec>& w = {});

/// Output map to col(y_1..y_N, e_1..e_N) with e_i = y_i - C_o v_i.
Mat network_output_matrix(const NetworkDesign& net, const std::vector<Vec>& w = {});

/// Gaussian entries, scale 1, from the recorded seed.
Vec random_initial_state(const NetworkDesign& net, std::uint64_t seed);

/// x_i = X_i v, eta_i = T_i Upsilon_i v, v_i = v, chi_i = 0, zeta_i = 0.
Vec manifold_initial_state(const NetworkDesign& net, const Vec& v);

/// RK4 step small enough for the given matrix: min(dt, 1/rho(A)).
double stable_step(const Mat& a, double dt);

/// Outputs are the y_i columns followed by the e_i columns; the trace's
/// agent count is N so sync_error and tail_amplitude read only y.
/// The integration step is reduced by stable_step when needed while the
/// recording interval stays at config.dt.
Trace simulate_network(const NetworkDesign& net, const Vec& x0,
                       const SimConfig& config, const std::vector<Vec>& w = {});

/// Largest |e_i(t)| over the whole trace.
double max_regulation_error(const Trace& trace);

/// Sigma_2: tau' = A tau + R y, zeta = C tau with y = col(y_1..y_N).
struct Interconnection {
  std::vector<ClosedLoop> sigma1;
  ClosedLoop sigma2;
  double gamma = 0.0;
  double gamma_zeta = 0.0;
};

struct DecayReport {
  double zeta_initial = 0.0;
  double zeta_final = 0.0;
  double y_initial = 0.0;
  double y_final = 0.0;
  double horizon = 0.0;
  double dt = 0.0;
  bool decayed = false;
};

Mat interconnection_matrix(const Interconnection& ic);

/// Throws kDesignRejection when gamma >= 1/(N gamma_zeta). A non-positive
/// horizon picks one long enough for the slowest mode to fall by 1e-4
/// (with a safety factor). Steps are exact exponentials of length dt.
DecayReport interconnection_sim(const Interconnection& ic, const Vec& x0,
                                double horizon = 0.0, double dt = 1e-2,
                                double threshold = 1e-3);

}  // namespace gammastab
