#pragma once

// Recursive SVD reduction of a controllable pair (A, B) and the block
// lower-triangular coordinates it induces.

#include <vector>

#include "gammastab/matrix_core.hpp"

namespace gammastab {

/// x' = A x + B u + R zeta,  y = C x.
struct LinearSystem {
  Mat A;
  Mat B;
  Mat C;
  Mat R;

  Index n() const { return A.rows(); }
  Index m() const { return B.cols(); }
  Index p() const { return C.rows(); }
  Index ell() const { return R.cols(); }

  /// Throws kInvalidInput on inconsistent dimensions or non-finite entries.
  void validate() const;
};

/// One recorded reduction step j: the SVD of Gamma_j and the split of its
/// left factor into range and complement columns.
struct ChainStep {
  Mat Phi;      // Phi_j
  Mat Gamma;    // Gamma_j
  Mat U;        // U_{j+1}
  Mat U_tilde;  // first r_j columns of U_{j+1}
  Mat U_bar;    // remaining columns
  Vec sigma;    // nonzero singular values of Gamma_j
  Mat H;        // H_{j+1}
  Index rank = 0;
};

struct SvdChain {
  Index l = 0;
  std::vector<ChainStep> steps;  // size l
  Mat Phi_last;                  // Phi_l
  Mat Gamma_last;                // Gamma_l, full row rank
  /// r_0 ... r_l.
  std::vector<Index> ranks;
  Index m = 0;

  const Mat& phi(Index j) const;
  const Mat& gamma(Index j) const;
};

/// Runs the reduction until Gamma_j has full row rank. Throws
/// kAssumptionViolation if (A, B) is not controllable or Gamma_j vanishes.
SvdChain svd_reduction_chain(const Mat& a, const Mat& b,
                             const Tolerance& tol = {});

/// Orthogonal T stacked from T_1 ... T_{l+1}; heights are (r_l, ..., r_0).
struct BlockTransform {
  Mat T;
  std::vector<Index> heights;
  std::vector<Index> offsets;

  Mat block(Index j) const;  // 0-based row block
};
BlockTransform build_T(const SvdChain& chain);

struct AssumptionReport {
  bool controllable = false;
  bool level_condition = false;
  bool detectable = false;
  /// First j (1-based) with C A^(j-1) B != 0, or 0.
  Index level_failure = 0;

  bool ok_for_state_feedback() const { return controllable && level_condition; }
};

/// Each flag is computed on its own; nothing throws on a failed check.
AssumptionReport check_assumptions(const LinearSystem& sys, Index l,
                                   const Tolerance& tol = {});

struct NormalForm {
  LinearSystem system;
  Index l = 0;
  std::vector<Index> ranks;
  BlockTransform transform;
  std::vector<Mat> A_blocks;  // A_1 ... A_{l+1}
  std::vector<Mat> B_blocks;  // B_1 ... B_{l+1}
  std::vector<Mat> R_blocks;  // R_1 ... R_{l+1}
  /// D[j][k] = T_j A T_k^T for k < j (0-based).
  std::vector<std::vector<Mat>> D;
  Mat C_xi;

  Index blocks() const { return l + 1; }
  const Mat& T() const { return transform.T; }
  Index block_size(Index j) const { return transform.heights[static_cast<size_t>(j)]; }
  Index block_offset(Index j) const { return transform.offsets[static_cast<size_t>(j)]; }

  /// T A T^T assembled from the blocks (zeros above the superdiagonal).
  Mat assembled_A() const;
};

/// Builds the normal form and checks its structural identities. Throws
/// kAssumptionViolation when C T_j^T != 0 for some j >= 2.
NormalForm to_normal_form(const LinearSystem& sys, const SvdChain& chain,
                          const Tolerance& tol = {});

/// Chain, assumption check and normal form in one call. Throws
/// kAssumptionViolation naming the first failed hypothesis.
NormalForm normal_form(const LinearSystem& sys, const Tolerance& tol = {});

}  // namespace gammastab
