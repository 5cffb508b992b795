#pragma once

// Four-agent synchronization example: agent family, network, pattern,
// reference model and the design data printed alongside it.

#include "gammastab/mas_sync.hpp"

namespace gammastab {

struct BundledExample {
  std::vector<AgentModel> agents;
  Mat adjacency;
  Mat laplacian;
  Mat A_o;
  Mat C_o;
  ReferenceModel reference;
  double gamma = 1.5;

  /// Printed design data at w = 0.
  Mat X_printed;
  Mat U_printed;
  Mat Phi_printed;
  Mat Psi_printed;
  Mat M;
  Mat N;
  /// Printed K_i; informational only.
  Mat K_printed;
};

/// Agent i: entries A(1,1), A(3,2), A(3,3), B(3,1) shifted by w_i in [-1, 1].
AgentModel example_agent();

BundledExample bundled_example();

}  // namespace gammastab
