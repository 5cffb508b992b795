#include "gammastab/example_data.hpp"

namespace gammastab {

AgentModel example_agent() {
  AgentModel a;
  a.nominal.A.resize(4, 4);
  a.nominal.A << -1, 1, 0, 0,
                 0, 0, 1, 1,
                 1, -2, -2, 0,
                 3, 0, 1, 2;
  a.nominal.B.resize(4, 2);
  a.nominal.B << 0, 0,
                 0, 1,
                 2, 0,
                 0, 0;
  a.nominal.C.resize(2, 4);
  a.nominal.C << 1, 0, 0, 0,
                 0, 0, 0, 1;
  a.uncertain = {{'A', 0, 0, 1.0, -1.0, 1.0},
                 {'A', 2, 1, 1.0, -1.0, 1.0},
                 {'A', 2, 2, 1.0, -1.0, 1.0},
                 {'B', 2, 0, 1.0, -1.0, 1.0}};
  return a;
}

BundledExample bundled_example() {
  BundledExample ex;
  ex.agents.assign(4, example_agent());
  ex.adjacency.resize(4, 4);
  ex.adjacency << 0, 2, 1, 0,
                  1, 0, 0, 1,
                  0, 0, 0, 1,
                  0, 0, 1, 0;
  ex.laplacian.resize(4, 4);
  ex.laplacian << 3, -2, -1, 0,
                  -1, 2, 0, -1,
                  0, 0, 1, -1,
                  0, 0, -1, 1;
  ex.A_o.resize(2, 2);
  ex.A_o << 0, 0.5,
            -0.5, 0;
  ex.C_o = Mat::Identity(2, 2);

  ReferenceModel& r = ex.reference;
  r.B_o.resize(2, 1);
  r.B_o << 0, 35;
  r.A_zeta.resize(2, 2);
  r.A_zeta << -0.03, 0.47,
              -0.357, -3.94;
  r.B_zeta = 0.03 * Mat::Ones(2, 2);
  r.C_zeta.resize(1, 2);
  r.C_zeta << 0.087, 0.112;
  r.gamma_zeta = 0.139;

  ex.X_printed.resize(4, 2);
  ex.X_printed << 1, 0,
                  1, 0.5,
                  -3.5, -2,
                  0, 1;
  ex.U_printed.resize(2, 2);
  ex.U_printed << -2.5, 2.375,
                  3.25, 1.5;
  Mat companion(2, 2);
  companion << 0, 1,
               -0.25, 0;
  ex.Phi_printed = kron(Mat::Identity(2, 2), companion);
  ex.Psi_printed = kron(Mat::Identity(2, 2), (Mat(1, 2) << 1, 0).finished());
  ex.M = kron(Mat::Identity(2, 2), (Mat(2, 2) << -0.5, 0, 0, -1).finished());
  ex.N = kron(Mat::Identity(2, 2), Mat::Ones(2, 1));
  ex.K_printed.resize(2, 4);
  ex.K_printed << 112, 0, 40, 787,
                  1188, 81, 0, 137;
  return ex;
}

}  // namespace gammastab
