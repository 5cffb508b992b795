#pragma once

// Robust output synchronization of heterogeneous agents: graph handling,
// regulator equations, steady-state generator, internal model and the
// per-agent distributed controller.

#include <cstdint>
#include <string>
#include <vector>

#include "gammastab/gamma_synthesis.hpp"
#include "gammastab/matrix_core.hpp"
#include "gammastab/normal_form.hpp"

namespace gammastab {

/// Entry (row, col) of A, B or C shifted by coefficient * w_k.
struct UncertainEntry {
  char matrix = 'A';
  Index row = 0;
  Index col = 0;
  double coefficient = 1.0;
  double lower = -1.0;
  double upper = 1.0;
};

struct AgentMatrices {
  Mat A;
  Mat B;
  Mat C;
};

struct AgentModel {
  AgentMatrices nominal;
  /// One entry per component of w.
  std::vector<UncertainEntry> uncertain;

  Index ell() const { return static_cast<Index>(uncertain.size()); }
  void validate() const;
  /// (A(w), B(w), C(w)); w = 0 reproduces the nominal triple exactly.
  AgentMatrices evaluate(const Vec& w) const;
  bool in_box(const Vec& w) const;
  /// Uniform samples of the box (seeded) at which B(w) loses column rank.
  std::vector<Vec> rank_deficient_samples(Index samples, std::uint64_t seed,
                                          const Tolerance& tol = {}) const;
};

struct PatternModel {
  Mat A_o;
  Mat C_o;
  Index s = 0;
  std::vector<double> coefficients;  // alpha_1 ... alpha_s
  Mat A_bar;
  Mat C_bar;
};

/// Throws kAssumptionViolation if (A_o, C_o) is not detectable.
PatternModel build_pattern_companion(const Mat& a_o, const Mat& c_o,
                                     const Tolerance& tol = {});

struct Digraph {
  Mat adjacency;
  Mat laplacian;
  bool has_spanning_tree = false;

  Index agents() const { return adjacency.rows(); }
};

/// a_ij is the weight agent i puts on agent j's output. Throws kInvalidInput
/// for negative weights, nonzero diagonal or a non-square matrix.
Digraph laplacian_and_spanning_tree(const Mat& adjacency);

struct ReferenceModel {
  Mat B_o;
  Mat A_zeta;
  Mat B_zeta;
  Mat C_zeta;
  double gamma_zeta = 0.0;

  /// Checks shapes against pattern dimension l and output dimension p,
  /// A_zeta Hurwitz and gamma_zeta > 0.
  void validate(Index l, Index p) const;
  Index n_zeta() const { return A_zeta.rows(); }
};

struct RegulatorSolution {
  Mat X;
  Mat U;
};

enum class VectorizationOrder { kXFirst, kUFirst };

/// Eigenvalues of A_o at which rank [[A - lambda I, B], [C, 0]] < n + m.
std::vector<std::complex<double>> transmission_zero_violations(
    const AgentMatrices& agent, const Mat& a_o, const Tolerance& tol = {});

/// Solves X A_o = A X + B U, C X = C_o as one dense linear system.
/// Throws kTransmissionZero naming the offending eigenvalue.
RegulatorSolution solve_regulator_equations(
    const Mat& a, const Mat& b, const Mat& c, const Mat& a_o, const Mat& c_o,
    const Tolerance& tol = {}, VectorizationOrder order = VectorizationOrder::kXFirst);

struct SteadyStateGenerator {
  Mat Phi;
  Mat Psi;
  Mat Upsilon;
};

SteadyStateGenerator build_steady_state_generator(const Mat& u,
                                                  const PatternModel& pattern,
                                                  const Tolerance& tol = {});

/// M = I_m (x) diag(-0.5, -1, ..., -s/2), N = I_m (x) ones(s).
void default_internal_model(Index s, Index m, Mat& m_out, Mat& n_out);

struct InternalModel {
  Mat M;
  Mat N;
  Mat T;
  Mat T_inv;
  /// Psi T^-1.
  Mat Q;
  /// zeta feedthrough (T Upsilon - N B^+ X) B_o C_zeta.
  Mat E_eta;
};

InternalModel build_internal_model(const AgentMatrices& nominal,
                                   const SteadyStateGenerator& gen, const Mat& m,
                                   const Mat& n, const Mat& x,
                                   const ReferenceModel& ref,
                                   const Tolerance& tol = {});

/// Plant in (x_bar, eta_bar) with R = -X B_o C_zeta and Q = Psi T^-1.
AugmentedPlant build_augmented_system(const AgentMatrices& nominal,
                                      const InternalModel& im, const Mat& x,
                                      const ReferenceModel& ref,
                                      const Tolerance& tol = {});

struct SyncOptions {
  double margin = 1.0;
  /// Empty selects the default internal model.
  Mat M;
  Mat N;
};

struct SyncDesign {
  AgentMatrices nominal;
  RegulatorSolution regulator;
  SteadyStateGenerator generator;
  InternalModel internal_model;
  AugmentedPlant plant;
  NormalForm normal_form;
  StateFeedbackResult state_feedback;
  OutputFeedbackResult output_feedback;
};

SyncDesign design_agent(const AgentModel& agent, const PatternModel& pattern,
                        const ReferenceModel& ref, double gamma,
                        const SyncOptions& opts = {}, const Tolerance& tol = {});

/// Per-agent controller with state (chi, v, zeta, eta):
///   state' = Ak state + By y_i + Bs varsigma_i,  u_i = Cu state,
/// where varsigma_i = sum_j a_ij (y_j - y_i).
struct AgentController {
  Mat Ak;
  Mat By;
  Mat Bs;
  Mat Cu;
  Index n_chi = 0;
  Index n_v = 0;
  Index n_zeta = 0;
  Index n_eta = 0;

  Index dim() const { return n_chi + n_v + n_zeta + n_eta; }
};

/// Throws kDesignRejection when gamma >= 1/(N gamma_zeta).
AgentController assemble_distributed_controller(const SyncDesign& design,
                                                const PatternModel& pattern,
                                                const ReferenceModel& ref,
                                                Index agents, double gamma);

struct NetworkDesign {
  Digraph graph;
  PatternModel pattern;
  ReferenceModel reference;
  std::vector<AgentModel> agents;
  std::vector<SyncDesign> designs;
  std::vector<AgentController> controllers;
  double gamma = 0.0;
  double bound = 0.0;
  std::vector<std::string> warnings;
};

/// Full design. The small-gain condition is checked before any synthesis.
NetworkDesign design_network(const std::vector<AgentModel>& agents,
                             const Mat& adjacency, const Mat& a_o, const Mat& c_o,
                             const ReferenceModel& ref, double gamma,
                             const SyncOptions& opts = {}, const Tolerance& tol = {});

}  // namespace gammastab
