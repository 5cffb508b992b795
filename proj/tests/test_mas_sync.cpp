#include "doctest.h"

#include <cmath>
#include <complex>

#include "gammastab/example_data.hpp"
#include "gammastab/generators.hpp"
#include "gammastab/mas_sync.hpp"
#include "gammastab/network_sim.hpp"
#include "support.hpp"

using namespace gammastab;
using test::max_abs;

namespace {

template <typename F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::kInternalConsistency;
}

Mat scalar(double v) { return Mat::Constant(1, 1, v); }

// Well-damped reference model with a small gain.
ReferenceModel quiet_reference() {
  ReferenceModel r;
  r.B_o = Mat::Identity(2, 2);
  r.A_zeta = -2.0 * Mat::Identity(2, 2);
  r.B_zeta = Mat::Identity(2, 2);
  r.C_zeta = Mat::Identity(2, 2);
  r.gamma_zeta = 0.05;
  return r;
}

std::vector<double> sorted_abs(const Eigen::VectorXcd& ev) {
  std::vector<double> out;
  for (Index i = 0; i < ev.size(); ++i) out.push_back(std::abs(ev(i)));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("Laplacian and spanning tree") {
  const Mat k3 = Mat::Ones(3, 3) - Mat::Identity(3, 3);
  const Digraph g = laplacian_and_spanning_tree(k3);
  CHECK(max_abs(g.laplacian - (3.0 * Mat::Identity(3, 3) - Mat::Ones(3, 3))) == 0.0);
  CHECK(g.has_spanning_tree);

  CHECK_FALSE(laplacian_and_spanning_tree(Mat::Zero(2, 2)).has_spanning_tree);
  CHECK(laplacian_and_spanning_tree(Mat::Zero(1, 1)).has_spanning_tree);

  // a_ij > 0 means agent i listens to agent j.
  Mat star = Mat::Zero(3, 3);
  star(0, 1) = 1.0;
  star(2, 1) = 1.0;
  CHECK(laplacian_and_spanning_tree(star).has_spanning_tree);
  Mat sink = Mat::Zero(3, 3);
  sink(0, 1) = 1.0;
  sink(0, 2) = 1.0;
  CHECK_FALSE(laplacian_and_spanning_tree(sink).has_spanning_tree);

  const BundledExample ex = bundled_example();
  const Digraph eg = laplacian_and_spanning_tree(ex.adjacency);
  CHECK(max_abs(eg.laplacian - ex.laplacian) == 0.0);
  CHECK(eg.has_spanning_tree);

  Rng rng(7);
  std::uniform_real_distribution<double> w(0.0, 3.0);
  for (int k = 0; k < 20; ++k) {
    Mat a(5, 5);
    for (Index i = 0; i < 5; ++i) {
      for (Index j = 0; j < 5; ++j) a(i, j) = i == j ? 0.0 : w(rng);
    }
    CHECK(laplacian_and_spanning_tree(a).laplacian.rowwise().sum().cwiseAbs().maxCoeff() < 1e-14);
  }

  Mat neg = k3;
  neg(0, 1) = -1.0;
  CHECK(kind_of([&] { laplacian_and_spanning_tree(neg); }) == ErrorKind::kInvalidInput);
  Mat diag = k3;
  diag(1, 1) = 1.0;
  CHECK(kind_of([&] { laplacian_and_spanning_tree(diag); }) == ErrorKind::kInvalidInput);
}

TEST_CASE("regulator equations") {
  // A = A_o, B = I, C = C_o has X = I, U = 0.
  const BundledExample ex = bundled_example();
  const RegulatorSolution trivial = solve_regulator_equations(
      ex.A_o, Mat::Identity(2, 2), ex.C_o, ex.A_o, ex.C_o);
  CHECK(max_abs(trivial.X - Mat::Identity(2, 2)) < 1e-12);
  CHECK(max_abs(trivial.U) < 1e-12);

  const AgentMatrices ag = example_agent().nominal;
  const RegulatorSolution sol = solve_regulator_equations(ag.A, ag.B, ag.C, ex.A_o, ex.C_o);
  CHECK(max_abs(sol.X - ex.X_printed) < 1e-10);
  CHECK(max_abs(ag.C * sol.X - ex.C_o) < 1e-12);
  // B has full column rank, so U is determined by X.
  const Mat u = ag.B.completeOrthogonalDecomposition().solve(sol.X * ex.A_o - ag.A * sol.X);
  CHECK(max_abs(sol.U - u) < 1e-10);

  const RegulatorSolution swapped = solve_regulator_equations(
      ag.A, ag.B, ag.C, ex.A_o, ex.C_o, {}, VectorizationOrder::kUFirst);
  CHECK(max_abs(swapped.X - sol.X) < 1e-10);
  CHECK(max_abs(swapped.U - sol.U) < 1e-10);
}

TEST_CASE("regulator on random agents") {
  Rng rng(9);
  const BundledExample ex = bundled_example();
  int solved = 0;
  for (int k = 0; k < 40; ++k) {
    const AgentMatrices ag{gaussian(4, 4, rng), gaussian(4, 2, rng), gaussian(2, 4, rng)};
    if (!transmission_zero_violations(ag, ex.A_o).empty()) continue;
    ++solved;
    const RegulatorSolution s = solve_regulator_equations(ag.A, ag.B, ag.C, ex.A_o, ex.C_o);
    CHECK(max_abs(s.X * ex.A_o - ag.A * s.X - ag.B * s.U) < 1e-9);
    CHECK(max_abs(ag.C * s.X - ex.C_o) < 1e-9);
  }
  CHECK(solved > 30);
}

TEST_CASE("transmission zero on the pattern spectrum") {
  // G(s) = s / (s + 1)^2 blocks a constant pattern.
  Mat a(2, 2);
  a << 0, 1, -1, -2;
  Mat b(2, 1);
  b << 0, 1;
  Mat c(1, 2);
  c << 0, 1;
  const auto bad = transmission_zero_violations({a, b, c}, scalar(0.0));
  REQUIRE(bad.size() == 1);
  CHECK(std::abs(bad.front()) < 1e-12);
  CHECK(kind_of([&] { solve_regulator_equations(a, b, c, scalar(0.0), scalar(1.0)); }) ==
        ErrorKind::kTransmissionZero);
  // The same plant follows a nonzero-frequency pattern.
  CHECK(transmission_zero_violations({a, b, c}, bundled_example().A_o).empty());
}

TEST_CASE("pattern companion form") {
  const BundledExample ex = bundled_example();
  const PatternModel pm = build_pattern_companion(ex.A_o, ex.C_o);
  CHECK(pm.s == 2);
  REQUIRE(pm.coefficients.size() == 2);
  CHECK(std::abs(pm.coefficients[0]) < 1e-14);
  CHECK(pm.coefficients[1] == doctest::Approx(0.25));
  Mat expected(2, 2);
  expected << 0, 1, -0.25, 0;
  CHECK(max_abs(pm.A_bar - expected) < 1e-14);
  CHECK(max_abs(pm.C_bar - Mat(Vec::Unit(2, 0).transpose())) == 0.0);

  Mat a3 = Mat::Zero(3, 3);
  a3(1, 2) = 1.0;
  a3(2, 1) = -1.0;
  const PatternModel p3 = build_pattern_companion(a3, Mat::Ones(1, 3));
  CHECK(p3.s == 3);
  CHECK(p3.A_bar(2, 1) == doctest::Approx(-1.0));
  CHECK(std::abs(p3.A_bar(2, 0)) < 1e-12);
  CHECK(std::abs(p3.A_bar(2, 2)) < 1e-12);

  Mat undetectable = Mat::Identity(2, 2);
  CHECK(kind_of([&] { build_pattern_companion(undetectable, Mat(Vec::Unit(2, 0).transpose())); }) ==
        ErrorKind::kAssumptionViolation);
}

TEST_CASE("steady-state generator identities") {
  const BundledExample ex = bundled_example();
  const PatternModel pm = build_pattern_companion(ex.A_o, ex.C_o);
  const AgentMatrices ag = example_agent().nominal;
  const RegulatorSolution sol = solve_regulator_equations(ag.A, ag.B, ag.C, ex.A_o, ex.C_o);
  const SteadyStateGenerator g = build_steady_state_generator(sol.U, pm);
  CHECK(max_abs(g.Phi - ex.Phi_printed) < 1e-14);
  CHECK(max_abs(g.Psi - ex.Psi_printed) == 0.0);
  CHECK(max_abs(g.Upsilon * ex.A_o - g.Phi * g.Upsilon) < 1e-10);
  CHECK(max_abs(sol.U - g.Psi * g.Upsilon) < 1e-10);

  Rng rng(11);
  Mat a3 = Mat::Zero(3, 3);
  a3(1, 2) = 2.0;
  a3(2, 1) = -2.0;
  const PatternModel p3 = build_pattern_companion(a3, Mat::Ones(1, 3));
  for (int k = 0; k < 20; ++k) {
    const Mat u = gaussian(2, 3, rng);
    const SteadyStateGenerator g3 = build_steady_state_generator(u, p3);
    CHECK(max_abs(g3.Upsilon * a3 - g3.Phi * g3.Upsilon) < 1e-10);
    CHECK(max_abs(u - g3.Psi * g3.Upsilon) < 1e-12);
  }
}

TEST_CASE("internal model") {
  const BundledExample ex = bundled_example();
  Mat m, n;
  default_internal_model(2, 2, m, n);
  CHECK(max_abs(m - ex.M) == 0.0);
  CHECK(max_abs(n - ex.N) == 0.0);

  const AgentMatrices ag = example_agent().nominal;
  const PatternModel pm = build_pattern_companion(ex.A_o, ex.C_o);
  const RegulatorSolution sol = solve_regulator_equations(ag.A, ag.B, ag.C, ex.A_o, ex.C_o);
  const SteadyStateGenerator g = build_steady_state_generator(sol.U, pm);
  const InternalModel im = build_internal_model(ag, g, m, n, sol.X, ex.reference);
  CHECK(max_abs(im.T * g.Phi - m * im.T - n * g.Psi) < 1e-10);
  CHECK(max_abs(im.T * im.T_inv - Mat::Identity(4, 4)) < 1e-10);
  CHECK(max_abs(im.Q - g.Psi * im.T_inv) < 1e-12);
  // M + N Q is similar to Phi, so its spectrum is +/- 0.5 i twice.
  for (double v : sorted_abs(eigenvalues(Mat(m + n * im.Q)))) CHECK(v == doctest::Approx(0.5));

  // Scalar constant pattern: T (0) - (-1/2) T = 1.
  PatternModel constant = build_pattern_companion(scalar(0.0), scalar(1.0));
  const SteadyStateGenerator g1 = build_steady_state_generator(scalar(3.0), constant);
  ReferenceModel r1{scalar(1.0), scalar(-1.0), scalar(1.0), scalar(1.0), 1.0};
  const InternalModel s1 = build_internal_model({scalar(-1.0), scalar(1.0), scalar(1.0)}, g1,
                                                scalar(-0.5), scalar(1.0), scalar(1.0), r1);
  CHECK(s1.T(0, 0) == doctest::Approx(2.0));
  CHECK(s1.Q(0, 0) == doctest::Approx(0.5));

  CHECK(kind_of([&] { build_internal_model(ag, g, Mat(-m), n, sol.X, ex.reference); }) ==
        ErrorKind::kAssumptionViolation);
}

TEST_CASE("augmented plant of the four-state agent") {
  const BundledExample ex = bundled_example();
  const PatternModel pm = build_pattern_companion(ex.A_o, ex.C_o);
  const SyncDesign d = design_agent(example_agent(), pm, ex.reference, ex.gamma,
                                    SyncOptions{1.0, ex.M, ex.N});
  const AugmentedPlant& p = d.plant;
  const Mat abar = p.Abar();
  CHECK(abar.rows() == 8);
  CHECK(pbh_detectable(abar, p.Cbar()));
  CHECK(max_abs(abar.bottomLeftCorner(4, 4)) == 0.0);
  CHECK(max_abs(abar.topRightCorner(4, 4) - p.B * p.Q) < 1e-12);
  CHECK(max_abs(p.R + d.regulator.X * ex.reference.B_o * ex.reference.C_zeta) < 1e-12);
  CHECK(max_abs(p.Rbar().bottomRows(4) -
                p.N * p.B.completeOrthogonalDecomposition().pseudoInverse() * p.R) < 1e-10);
  CHECK(verify_certificate(d.output_feedback.closed_loop, d.output_feedback.certificate).ok);
  CHECK(d.output_feedback.certificate.gain() == doctest::Approx(ex.gamma));

  const AgentController c = assemble_distributed_controller(d, pm, ex.reference, 4, ex.gamma);
  CHECK(c.dim() == 16);
  CHECK(c.n_chi == 8);
  CHECK(c.n_v == 2);
  CHECK(c.n_zeta == 2);
  CHECK(c.n_eta == 4);
  CHECK(c.Ak.rows() == 16);
  CHECK(c.Cu.rows() == 2);
  CHECK(kind_of([&] { assemble_distributed_controller(d, pm, ex.reference, 4, 2.0); }) ==
        ErrorKind::kDesignRejection);
}

TEST_CASE("network design rejects gains above the small-gain bound") {
  const BundledExample ex = bundled_example();
  CHECK(kind_of([&] {
          design_network(ex.agents, ex.adjacency, ex.A_o, ex.C_o, ex.reference, 2.0);
        }) == ErrorKind::kDesignRejection);
  const NetworkDesign net =
      design_network(ex.agents, ex.adjacency, ex.A_o, ex.C_o, ex.reference, ex.gamma,
                     SyncOptions{1.0, ex.M, ex.N});
  CHECK(net.bound == doctest::Approx(1.0 / (4 * 0.139)));
  CHECK(net.controllers.size() == 4);
}

TEST_CASE("four agents synchronize under a well-damped reference model") {
  const BundledExample ex = bundled_example();
  const NetworkDesign net = design_network(ex.agents, ex.adjacency, ex.A_o, ex.C_o,
                                           quiet_reference(), ex.gamma,
                                           SyncOptions{1.0, ex.M, ex.N});
  SimConfig cfg;
  cfg.dt = 1e-3;
  cfg.horizon = 120.0;
  cfg.record_every = 10;
  const Trace tr = simulate_network(net, random_initial_state(net, 1), cfg);
  const double amp = tail_amplitude(tr);
  const double err = sync_error(tr);
  CHECK(amp > 0.1);
  CHECK(err <= 1e-2 * amp);
  for (Index col = 0; col < tr.agents * tr.outputs_per_agent; ++col) {
    CHECK(dominant_frequency(tail_signal(tr, col), 1e-2) == doctest::Approx(0.5).epsilon(0.01));
  }
}
