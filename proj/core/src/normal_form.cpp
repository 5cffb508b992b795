#include "gammastab/normal_form.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gammastab {

void LinearSystem::validate() const {
  require_square(A, "A");
  require_finite(A, "A");
  require_finite(B, "B");
  require_finite(C, "C");
  require_finite(R, "R");
  const Index n = A.rows();
  std::ostringstream os;
  if (B.rows() != n) os << "B has " << B.rows() << " rows, expected " << n << "; ";
  if (C.cols() != n) os << "C has " << C.cols() << " columns, expected " << n << "; ";
  if (R.rows() != n) os << "R has " << R.rows() << " rows, expected " << n << "; ";
  if (n == 0) os << "state dimension must be positive; ";
  if (B.cols() == 0) os << "B must have at least one column; ";
  const std::string msg = os.str();
  if (!msg.empty()) {
    throw Error(ErrorKind::kInvalidInput, "inconsistent system: " + msg);
  }
}

const Mat& SvdChain::phi(Index j) const {
  if (j == l) return Phi_last;
  return steps.at(static_cast<size_t>(j)).Phi;
}

const Mat& SvdChain::gamma(Index j) const {
  if (j == l) return Gamma_last;
  return steps.at(static_cast<size_t>(j)).Gamma;
}

SvdChain svd_reduction_chain(const Mat& a, const Mat& b, const Tolerance& tol) {
  require_square(a, "A");
  require_finite(a, "A");
  require_finite(b, "B");
  if (b.rows() != a.rows()) {
    throw Error(ErrorKind::kInvalidInput, "B row count must match A");
  }
  if (b.size() == 0 || b.isZero(0.0)) {
    throw Error(ErrorKind::kAssumptionViolation,
                "controllability assumption violated: B is zero");
  }
  if (!pbh_controllable(a, b, tol)) {
    throw Error(ErrorKind::kAssumptionViolation,
                "controllability assumption violated: (A, B) is not controllable");
  }

  SvdChain chain;
  chain.m = b.cols();
  Mat phi = a;
  Mat gamma = b;
  for (Index j = 0;; ++j) {
    const Index rows = gamma.rows();
    const Index r = numeric_rank(gamma, tol);
    if (r == rows) {
      chain.l = j;
      chain.Phi_last = std::move(phi);
      chain.Gamma_last = std::move(gamma);
      chain.ranks.push_back(r);
      return chain;
    }
    if (r == 0) {
      throw Error(ErrorKind::kAssumptionViolation,
                  "reduction chain reached Gamma = 0 before full row rank; "
                  "the pair is numerically uncontrollable");
    }
    Svd svd = svd_full(gamma);
    ChainStep step;
    step.rank = r;
    step.U_tilde = svd.U.leftCols(r);
    step.U_bar = svd.U.rightCols(rows - r);
    step.sigma = svd.S.head(r);
    step.U = std::move(svd.U);
    step.H = std::move(svd.H);
    Mat next_phi = step.U_bar.transpose() * phi * step.U_bar;
    Mat next_gamma = step.U_bar.transpose() * phi * step.U_tilde;
    step.Phi = std::move(phi);
    step.Gamma = std::move(gamma);
    chain.steps.push_back(std::move(step));
    chain.ranks.push_back(r);
    phi = std::move(next_phi);
    gamma = std::move(next_gamma);
  }
}

Mat BlockTransform::block(Index j) const {
  const auto k = static_cast<size_t>(j);
  return T.middleRows(offsets.at(k), heights.at(k));
}

BlockTransform build_T(const SvdChain& chain) {
  const Index l = chain.l;
  const Index n = chain.l == 0 ? chain.Phi_last.rows()
                               : chain.steps.front().Phi.rows();
  // prefix[k] = U_bar_k^T ... U_bar_1^T, prefix[0] = I.
  std::vector<Mat> prefix{Mat::Identity(n, n)};
  for (Index k = 0; k < l; ++k) {
    prefix.push_back(chain.steps[static_cast<size_t>(k)].U_bar.transpose() *
                     prefix.back());
  }

  std::vector<Mat> rows;
  rows.push_back(prefix[static_cast<size_t>(l)]);
  for (Index j = 2; j <= l + 1; ++j) {
    const ChainStep& st = chain.steps[static_cast<size_t>(l + 1 - j)];
    rows.push_back(st.U_tilde.transpose() * prefix[static_cast<size_t>(l + 1 - j)]);
  }

  BlockTransform out;
  out.T.resize(n, n);
  Index offset = 0;
  for (const Mat& r : rows) {
    out.offsets.push_back(offset);
    out.heights.push_back(r.rows());
    out.T.middleRows(offset, r.rows()) = r;
    offset += r.rows();
  }
  if (offset != n) {
    throw Error(ErrorKind::kInternalConsistency,
                "transform blocks do not cover the state dimension");
  }
  const double orth = (out.T * out.T.transpose() - Mat::Identity(n, n)).norm();
  if (orth > 1e-12 * static_cast<double>(n)) {
    throw Error(ErrorKind::kInternalConsistency,
                "assembled transform is not orthogonal");
  }
  return out;
}

AssumptionReport check_assumptions(const LinearSystem& sys, Index l,
                                   const Tolerance& tol) {
  sys.validate();
  AssumptionReport rep;
  rep.controllable = pbh_controllable(sys.A, sys.B, tol);
  rep.detectable = pbh_detectable(sys.A, sys.C, tol);
  rep.level_condition = true;
  const double na = sys.A.norm();
  const double nb = sys.B.norm();
  const double nc = sys.C.norm();
  Mat apow_b = sys.B;  // A^(j-1) B
  double apow_norm = 1.0;
  for (Index j = 1; j <= l; ++j) {
    const double lhs = (sys.C * apow_b).norm();
    if (lhs > 1e-10 * nc * apow_norm * nb) {
      rep.level_condition = false;
      rep.level_failure = j;
      break;
    }
    apow_b = sys.A * apow_b;
    apow_norm *= na;
  }
  return rep;
}

Mat NormalForm::assembled_A() const {
  const Index n = system.n();
  Mat f = Mat::Zero(n, n);
  for (Index j = 0; j < blocks(); ++j) {
    const Index oj = block_offset(j);
    const Index dj = block_size(j);
    f.block(oj, oj, dj, dj) = A_blocks[static_cast<size_t>(j)];
    if (j + 1 < blocks()) {
      f.block(oj, block_offset(j + 1), dj, block_size(j + 1)) =
          B_blocks[static_cast<size_t>(j)];
    }
    for (Index k = 0; k < j; ++k) {
      f.block(oj, block_offset(k), dj, block_size(k)) =
          D[static_cast<size_t>(j)][static_cast<size_t>(k)];
    }
  }
  return f;
}

NormalForm to_normal_form(const LinearSystem& sys, const SvdChain& chain,
                          const Tolerance& tol) {
  sys.validate();
  (void)tol;
  NormalForm nf;
  nf.system = sys;
  nf.l = chain.l;
  nf.ranks = chain.ranks;
  nf.transform = build_T(chain);
  const Index l = chain.l;
  const Index nb = l + 1;

  nf.A_blocks.push_back(chain.Phi_last);
  nf.B_blocks.push_back(chain.Gamma_last);
  for (Index j = 2; j <= l + 1; ++j) {
    const ChainStep& st = chain.steps[static_cast<size_t>(l + 1 - j)];
    nf.A_blocks.push_back(st.U_tilde.transpose() * st.Phi * st.U_tilde);
    const Index r = st.rank;
    nf.B_blocks.push_back(st.sigma.asDiagonal() *
                          st.H.leftCols(r).transpose());
  }

  std::vector<Mat> tb;
  for (Index j = 0; j < nb; ++j) tb.push_back(nf.transform.block(j));
  nf.D.resize(static_cast<size_t>(nb));
  for (Index j = 0; j < nb; ++j) {
    const Mat& tj = tb[static_cast<size_t>(j)];
    nf.R_blocks.push_back(tj * sys.R);
    for (Index k = 0; k < j; ++k) {
      nf.D[static_cast<size_t>(j)].push_back(tj * sys.A *
                                             tb[static_cast<size_t>(k)].transpose());
    }
  }
  nf.C_xi = sys.C * tb.front().transpose();

  const double c_scale = std::max(1.0, sys.C.norm());
  for (Index j = 1; j < nb; ++j) {
    const double leak = (sys.C * tb[static_cast<size_t>(j)].transpose()).norm();
    if (leak > 1e-10 * c_scale) {
      std::ostringstream os;
      os << "output leaks into normal-form block " << (j + 1)
         << " (|C T_j^T| = " << leak
         << "); the relative-degree assumption C A^(j-1) B = 0 does not hold";
      throw Error(ErrorKind::kAssumptionViolation, os.str());
    }
  }

  // Structural identities of the block form.
  const Mat& t = nf.T();
  const Mat tat = t * sys.A * t.transpose();
  const double scale =
      std::max({1.0, sys.A.norm(), sys.B.norm()});
  const double diff = (tat - nf.assembled_A()).norm();
  if (diff > 1e-10 * scale) {
    std::ostringstream os;
    os << "normal-form block structure check failed (residual " << diff << ")";
    throw Error(ErrorKind::kInternalConsistency, os.str());
  }
  Mat tb_expected = Mat::Zero(sys.n(), sys.m());
  tb_expected.bottomRows(nf.block_size(l)) = nf.B_blocks.back();
  if ((t * sys.B - tb_expected).norm() > 1e-10 * scale) {
    throw Error(ErrorKind::kInternalConsistency,
                "input does not enter only the last normal-form block");
  }
  return nf;
}

NormalForm normal_form(const LinearSystem& sys, const Tolerance& tol) {
  sys.validate();
  const SvdChain chain = svd_reduction_chain(sys.A, sys.B, tol);
  const AssumptionReport rep = check_assumptions(sys, chain.l, tol);
  if (!rep.level_condition) {
    std::ostringstream os;
    os << "relative-degree assumption violated: C A^" << (rep.level_failure - 1)
       << " B != 0 with " << chain.l << " SVD steps";
    throw Error(ErrorKind::kAssumptionViolation, os.str());
  }
  return to_normal_form(sys, chain, tol);
}

}  // namespace gammastab
