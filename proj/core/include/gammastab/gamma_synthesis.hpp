#pragma once

// State- and output-feedback controllers with a prescribed external gain,
// together with the quadratic dissipation certificates that witness it.

#include <string>
#include <vector>

#include "gammastab/matrix_core.hpp"
#include "gammastab/normal_form.hpp"

namespace gammastab {

/// Closed loop x_c' = A x_c + R zeta, y = C x_c.
struct ClosedLoop {
  Mat A;
  Mat R;
  Mat C;
};

/// Quadratic certificate V = x_c^T P x_c with V' <= -alpha |y|^2 + beta |zeta|^2.
///
/// Synthesized certificates also carry the coordinates z = J x_c in which
/// they were constructed: the closed loop there is (A_z, R_z, C_z) and
/// P = J^T P_z J. Gains that make the x-coordinates badly conditioned leave
/// the z-coordinates well scaled, so the check is carried out there.
struct IosCertificate {
  Mat P;
  double alpha = 0.0;
  double beta = 0.0;

  Mat J;
  /// Optional inverse of J. When present, invertibility is certified by
  /// ||J J_inv - I|| < 1/2 instead of a rank test.
  Mat J_inv;
  Mat P_z;
  Mat A_z;
  Mat R_z;
  Mat C_z;

  double gain() const { return beta / alpha; }
  bool has_coordinates() const { return J.size() > 0; }
};

/// [[A^T P + P A + alpha C^T C, P R], [R^T P, -beta I]].
Mat make_certificate_matrix(const Mat& a_c, const Mat& r_c, const Mat& c_c,
                            const Mat& p, double alpha, double beta);

struct CertificateCheck {
  bool ok = false;
  bool p_positive = false;
  /// Largest eigenvalue of the certificate matrix in the structured
  /// coordinates after the congruence diag(1 / sqrt(max(1, |m_ii|))) (equal
  /// to max_eig_x when there are no structured coordinates).
  double max_eig_z = 0.0;
  double max_eig_x = 0.0;
  /// Scale-aware slack used for the x-coordinate matrix.
  double x_tolerance = 0.0;
  bool x_ok = false;
  /// Relative residual of J A_c = A_z J, J R_c = R_z, C_c = C_z J.
  double consistency = 0.0;
  std::string detail;
};

/// Checks positivity of P and negative semidefiniteness of the certificate
/// matrix. With structured coordinates the decision uses them (absolute
/// psd_tol) after confirming they describe the same closed loop; otherwise it
/// uses psd_tol * max(1, |M|).
CertificateCheck verify_certificate(const ClosedLoop& loop,
                                    const IosCertificate& cert,
                                    const Tolerance& tol = {});

ClosedLoop close_loop(const LinearSystem& sys, const Mat& k);

struct StateFeedbackResult {
  double gamma = 0.0;
  Mat K;
  std::vector<double> kappas;
  /// Weights p_j of V = 1/2 sum p_j |xi_bar_j|^2.
  std::vector<double> weights;
  std::vector<Mat> stage_gains;
  /// S with col(xi_bar_1, ..., xi_bar_{l+1}) = S x, and its inverse.
  Mat composite_transform;
  Mat composite_inverse;
  /// Target cascade, its perturbation matrix and output map in xi_bar.
  Mat cascade;
  Mat R_cascade;
  Mat C_cascade;
  std::vector<Mat> R_bar;
  IosCertificate certificate;
  /// Number of times the kappa scale was doubled.
  int escalations = 0;
};

struct SynthesisOptions {
  double margin = 1.0;
  int max_escalations = 20;
};

/// Backstepping on the normal form. Throws kInvalidInput for gamma <= 0 and
/// kSynthesisFailure if no certificate verifies after escalation.
StateFeedbackResult synthesize_state_feedback(const NormalForm& nf, double gamma,
                                              const SynthesisOptions& opts = {},
                                              const Tolerance& tol = {});

/// Plant with an attached z-subsystem:
///   [x; z]' = [[A, B Q], [0, M + N Q]] [x; z] + [B; N] u + [R; N B^+ R] zeta
///   y = [C, 0] [x; z].
struct AugmentedPlant {
  Mat A;
  Mat B;
  Mat C;
  Mat R;
  Mat M;
  Mat N;
  Mat Q;

  void validate() const;
  LinearSystem base() const { return {A, B, C, R}; }
  Mat Abar(const Tolerance& tol = {}) const;
  Mat Bbar() const;
  Mat Rbar(const Tolerance& tol = {}) const;
  Mat Cbar() const;
};

/// u = Kbar chi, chi' = Abar chi + L (y - Cbar chi) + Bbar u + Rbar zeta.
/// The observer consumes zeta, which must therefore be measured.
struct OutputFeedbackController {
  Mat Kbar;
  Mat L;
  Mat Abar;
  Mat Bbar;
  Mat Cbar;
  Mat Rbar;
};

ClosedLoop close_loop(const OutputFeedbackController& ctrl);

struct OutputFeedbackResult {
  OutputFeedbackController controller;
  ClosedLoop closed_loop;
  IosCertificate certificate;
};

/// Requires M Hurwitz, (M, N) controllable, (A, C) detectable and B of full
/// column rank; `state_feedback` must come from the (A, B, C, R) subsystem.
/// Throws kAssumptionViolation naming the failed hypothesis.
OutputFeedbackResult synthesize_output_feedback(
    const AugmentedPlant& plant, const StateFeedbackResult& state_feedback,
    const Mat& noise_weight, const Tolerance& tol = {});
OutputFeedbackResult synthesize_output_feedback(
    const AugmentedPlant& plant, const StateFeedbackResult& state_feedback,
    const Tolerance& tol = {});

/// Certificate for an arbitrary Hurwitz loop from A^T P + P A = -I with
/// alpha = 1/(2|C|^2) and beta just above 2|P R|^2.
IosCertificate lyapunov_certificate(const ClosedLoop& loop,
                                    const Tolerance& tol = {});

/// Bounded test signal zeta(t) = H exp(S t) w0.
struct Excitation {
  Mat S;
  Mat H;
  Vec w0;
  std::string label;
};
Excitation step_excitation(const Vec& direction);
Excitation sinusoid_excitation(double omega, const Vec& cos_dir, const Vec& sin_dir);

/// Steps along each channel plus sinusoids at the peak of sigma_max of the
/// frequency response, in both real and imaginary input directions.
std::vector<Excitation> default_excitations(const ClosedLoop& loop);

/// max over excitations of int |y|^2 / int |zeta|^2 from x_c(0) = 0.
/// Energies are exact: a Van Loan exponential over a base step of at most
/// min(dt, 2 / rho) is doubled up to the horizon.
double empirical_gain_estimate(const ClosedLoop& loop,
                               const std::vector<Excitation>& excitations,
                               double horizon, double dt);

double small_gain_bound(double gamma_zeta, Index agents);
bool small_gain_check(double gamma, double gamma_zeta, Index agents);

}  // namespace gammastab
