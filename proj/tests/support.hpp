#pragma once

// Oracles shared by the test files.

#include <Eigen/Dense>

#include "gammastab/generators.hpp"
#include "gammastab/matrix_core.hpp"

namespace gammastab::test {

inline double max_abs(const Mat& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

/// Rank from a column-pivoted QR with an absolute floor relative to the
/// largest diagonal entry of R.
inline Index qr_rank(const Mat& m, double rel = 1e-9) {
  if (m.size() == 0) return 0;
  Eigen::ColPivHouseholderQR<Mat> qr(m);
  qr.setThreshold(rel);
  return qr.rank();
}

/// [B, AB, ..., A^(n-1) B].
inline Mat kalman_matrix(const Mat& a, const Mat& b) {
  const Index n = a.rows();
  Mat k(n, n * b.cols());
  Mat block = b;
  for (Index j = 0; j < n; ++j) {
    k.middleCols(j * b.cols(), b.cols()) = block;
    block = a * block;
  }
  return k;
}

/// Integer-valued matrices keep Kalman ranks exact in floating point.
inline Mat integer_matrix(Index rows, Index cols, Rng& rng, int lo = -2, int hi = 2) {
  std::uniform_int_distribution<int> pick(lo, hi);
  Mat m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = pick(rng);
  }
  return m;
}

}  // namespace gammastab::test
