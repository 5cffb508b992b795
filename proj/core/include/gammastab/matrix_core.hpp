#pragma once

// Dense real-matrix kernel: decompositions, equation solvers and the rank and
// stability tests used throughout the library. Everything here is a pure
// function of its arguments.

#include <Eigen/Dense>

#include <complex>
#include <vector>

#include "gammastab/errors.hpp"

namespace gammastab {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Index = Eigen::Index;

/// Numerical thresholds. The library works in floating point, so every exact
/// statement (rank, zero residual, semidefiniteness) is decided against one
/// of these.
struct Tolerance {
  /// Singular values at or below rank_tol * sigma_max count as zero.
  double rank_tol = 1e-9;
  /// Absolute residual threshold for solver postconditions.
  double eq_tol = 1e-8;
  /// Eigenvalue slack for semidefiniteness tests.
  double psd_tol = 1e-8;

  /// Throws kInvalidInput unless all three are strictly positive and finite.
  void validate() const;

  /// Defaults overridden by GAMMASTAB_RANK_TOL, GAMMASTAB_EQ_TOL and
  /// GAMMASTAB_PSD_TOL when those are set.
  static Tolerance from_environment();
};

/// Throws kInvalidInput if any entry is NaN or infinite.
void require_finite(const Mat& m, const char* what);

/// Throws kInvalidInput if m is not square.
void require_square(const Mat& m, const char* what);

Mat kron(const Mat& a, const Mat& b);

/// Full singular value decomposition M = U * diag(S) * H^T with square
/// orthogonal U and H and S sorted in non-increasing order.
struct Svd {
  Mat U;
  Vec S;
  Mat H;
};
Svd svd_full(const Mat& m);

Index numeric_rank(const Mat& m, const Tolerance& tol = {});
Index numeric_rank(const Eigen::MatrixXcd& m, const Tolerance& tol = {});

/// Moore-Penrose pseudo-inverse by truncated SVD.
Mat pinv(const Mat& m, const Tolerance& tol = {});

/// Solves T*F - M*T = Q for T by Kronecker vectorization.
Mat solve_sylvester(const Mat& f, const Mat& m, const Mat& q,
                    const Tolerance& tol = {});

/// Solves A^T P + P A + Q = 0. Requires A Hurwitz.
Mat solve_lyapunov(const Mat& a, const Mat& q, const Tolerance& tol = {});

/// Filter-Riccati observer gain: P solves A P + P A^T - P C^T C P + W = 0
/// and L = P C^T.
struct ObserverGain {
  Mat L;
  Mat P;
};
ObserverGain observer_gain(const Mat& a, const Mat& c, const Mat& noise_weight,
                           const Tolerance& tol = {});
ObserverGain observer_gain(const Mat& a, const Mat& c, const Tolerance& tol = {});

/// Coefficients (a1, ..., as) of the monic minimal polynomial
/// x^s + a1 x^(s-1) + ... + as.
std::vector<double> minimal_polynomial(const Mat& a, const Tolerance& tol = {});

/// Evaluates A^s + a1 A^(s-1) + ... + as I.
Mat evaluate_monic_polynomial(const Mat& a, const std::vector<double>& coeffs);

Eigen::VectorXcd eigenvalues(const Mat& a);

/// PBH rank test over every eigenvalue of A.
bool pbh_controllable(const Mat& a, const Mat& b, const Tolerance& tol = {});
/// PBH rank test over the eigenvalues of A with non-negative real part.
bool pbh_detectable(const Mat& a, const Mat& c, const Tolerance& tol = {});
/// PBH rank test over every eigenvalue of A (observability).
bool pbh_observable(const Mat& a, const Mat& c, const Tolerance& tol = {});

/// Largest real part over the eigenvalues of A.
double spectral_abscissa(const Mat& a);
inline bool is_hurwitz(const Mat& a, double margin = 0.0) {
  return spectral_abscissa(a) < -margin;
}

/// Largest eigenvalue of the symmetric part (M + M^T)/2.
double max_symmetric_eigenvalue(const Mat& m);
bool is_negative_semidefinite(const Mat& m, const Tolerance& tol = {});

/// Spectral (2-) norm.
double norm2(const Mat& m);

}  // namespace gammastab
