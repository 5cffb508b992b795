#include "gammastab/gamma_synthesis.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

namespace gammastab {

namespace {

double rel(double num, double den) {
  return num / std::max(den, std::numeric_limits<double>::min());
}

double min_symmetric_eigenvalue(const Mat& m) {
  return -max_symmetric_eigenvalue(-m);
}

Mat block_diag(const std::vector<Mat>& blocks) {
  Index r = 0, c = 0;
  for (const Mat& b : blocks) {
    r += b.rows();
    c += b.cols();
  }
  Mat out = Mat::Zero(r, c);
  r = c = 0;
  for (const Mat& b : blocks) {
    out.block(r, c, b.rows(), b.cols()) = b;
    r += b.rows();
    c += b.cols();
  }
  return out;
}

}  // namespace

Mat make_certificate_matrix(const Mat& a_c, const Mat& r_c, const Mat& c_c,
                            const Mat& p, double alpha, double beta) {
  require_square(a_c, "closed-loop A");
  const Index n = a_c.rows();
  if (p.rows() != n || p.cols() != n || r_c.rows() != n || c_c.cols() != n) {
    throw Error(ErrorKind::kInvalidInput,
                "certificate matrix: dimensions of A, R, C and P disagree");
  }
  if (!(alpha > 0.0) || !(beta > 0.0)) {
    throw Error(ErrorKind::kInvalidInput,
                "certificate constants alpha and beta must be positive");
  }
  const Index ell = r_c.cols();
  Mat out(n + ell, n + ell);
  out.topLeftCorner(n, n) =
      a_c.transpose() * p + p * a_c + alpha * c_c.transpose() * c_c;
  out.topRightCorner(n, ell) = p * r_c;
  out.bottomLeftCorner(ell, n) = r_c.transpose() * p;
  out.bottomRightCorner(ell, ell) = -beta * Mat::Identity(ell, ell);
  return 0.5 * (out + out.transpose());
}

CertificateCheck verify_certificate(const ClosedLoop& loop,
                                    const IosCertificate& cert,
                                    const Tolerance& tol) {
  CertificateCheck chk;
  std::ostringstream why;
  if (!(cert.alpha > 0.0) || !(cert.beta > 0.0)) {
    chk.detail = "alpha and beta must be positive";
    return chk;
  }
  const Mat mx = make_certificate_matrix(loop.A, loop.R, loop.C, cert.P,
                                         cert.alpha, cert.beta);
  chk.max_eig_x = max_symmetric_eigenvalue(mx);
  chk.x_tolerance = tol.psd_tol * std::max(1.0, mx.norm());
  chk.x_ok = chk.max_eig_x <= chk.x_tolerance;

  if (!cert.has_coordinates()) {
    chk.p_positive = min_symmetric_eigenvalue(cert.P) > 0.0;
    chk.max_eig_z = chk.max_eig_x;
    chk.ok = chk.p_positive && chk.x_ok;
    if (!chk.p_positive) why << "P is not positive definite; ";
    if (!chk.x_ok) why << "certificate matrix has eigenvalue " << chk.max_eig_x << "; ";
    chk.detail = why.str();
    return chk;
  }

  const Mat& j = cert.J;
  const double nj = j.norm();
  const double c1 = rel((j * loop.A - cert.A_z * j).norm(),
                        nj * loop.A.norm() + cert.A_z.norm() * nj);
  const double c2 = rel((j * loop.R - cert.R_z).norm(),
                        nj * loop.R.norm() + cert.R_z.norm());
  const double c3 = rel((loop.C - cert.C_z * j).norm(),
                        loop.C.norm() + cert.C_z.norm() * nj);
  const double c4 = rel((cert.P - j.transpose() * cert.P_z * j).norm(),
                        cert.P.norm() + nj * nj * cert.P_z.norm());
  chk.consistency = std::max({c1, c2, c3, c4});
  const bool consistent = chk.consistency <= 1e-9;
  if (!consistent) why << "structured coordinates do not match the loop (" << chk.consistency << "); ";

  bool j_invertible = false;
  if (cert.J_inv.rows() == j.rows() && cert.J_inv.cols() == j.cols()) {
    j_invertible =
        (j * cert.J_inv - Mat::Identity(j.rows(), j.cols())).norm() < 0.5;
  } else {
    j_invertible = numeric_rank(j, tol) == j.rows();
  }
  chk.p_positive = j_invertible && min_symmetric_eigenvalue(cert.P_z) > 0.0;
  if (!chk.p_positive) why << "P is not positive definite; ";

  const Mat mz = make_certificate_matrix(cert.A_z, cert.R_z, cert.C_z, cert.P_z,
                                         cert.alpha, cert.beta);
  // Inertia-preserving diagonal congruence; the blocks of P_z can differ by
  // many orders of magnitude.
  const Vec d = mz.diagonal().cwiseAbs().cwiseMax(1.0).cwiseSqrt().cwiseInverse();
  chk.max_eig_z = max_symmetric_eigenvalue(d.asDiagonal() * mz * d.asDiagonal());
  const bool z_ok = chk.max_eig_z <= tol.psd_tol;
  if (!z_ok) why << "certificate matrix has eigenvalue " << chk.max_eig_z << "; ";
  chk.ok = consistent && chk.p_positive && z_ok;
  chk.detail = why.str();
  return chk;
}

ClosedLoop close_loop(const LinearSystem& sys, const Mat& k) {
  sys.validate();
  if (k.rows() != sys.m() || k.cols() != sys.n()) {
    throw Error(ErrorKind::kInvalidInput, "gain K must be m x n");
  }
  return {sys.A + sys.B * k, sys.R, sys.C};
}

StateFeedbackResult synthesize_state_feedback(const NormalForm& nf, double gamma,
                                              const SynthesisOptions& opts,
                                              const Tolerance& tol) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw Error(ErrorKind::kInvalidInput, "gamma must be positive and finite");
  }
  if (!(opts.margin > 0.0) || !std::isfinite(opts.margin)) {
    throw Error(ErrorKind::kInvalidInput, "margin must be positive and finite");
  }
  const Index nb = nf.blocks();
  const Index l = nf.l;
  const Index n = nf.system.n();
  const double q = std::max(1.0, static_cast<double>(l + 1) / 2.0);
  const double cxi2 = std::pow(norm2(nf.C_xi), 2);
  std::vector<Mat> b_pinv;
  for (const Mat& b : nf.B_blocks) b_pinv.push_back(pinv(b, tol));

  std::string last_failure;
  for (int attempt = 0; attempt <= opts.max_escalations; ++attempt) {
    const double scale = std::ldexp(1.0, attempt);
    StateFeedbackResult res;
    res.gamma = gamma;
    res.escalations = attempt;

    // Stage 1.
    const Index d1 = nf.block_size(0);
    Mat w = Mat::Identity(d1, d1);
    Mat rcas = nf.R_blocks[0];
    res.R_bar.push_back(rcas);
    double p_prev = 1.0;
    res.weights.push_back(1.0);
    double kappa =
        scale * (0.25 + q * std::pow(norm2(rcas), 2) + cxi2 / (2.0 * gamma) +
                 opts.margin);
    res.kappas.push_back(kappa);
    Mat acas = -kappa * Mat::Identity(d1, d1);
    Mat k_prev = b_pinv[0] * (-kappa * Mat::Identity(d1, d1) - nf.A_blocks[0]);
    res.stage_gains.push_back(k_prev);
    Index dim = d1;

    for (Index j = 1; j < nb; ++j) {
      const auto ju = static_cast<size_t>(j);
      const Index dj = nf.block_size(j);
      const Index dnew = dim + dj;

      // xi_{1..j+1} = W Xi_{j+1}.
      Mat w_next = Mat::Zero(dnew, dnew);
      w_next.topLeftCorner(dim, dim) = w;
      w_next.bottomLeftCorner(dj, dim) = k_prev;
      w_next.bottomRightCorner(dj, dj) = Mat::Identity(dj, dj);

      Mat f_row(dj, dnew);
      for (Index k = 0; k < j; ++k) {
        f_row.middleCols(nf.block_offset(k), nf.block_size(k)) =
            nf.D[ju][static_cast<size_t>(k)];
      }
      f_row.rightCols(dj) = nf.A_blocks[ju];

      // Xi_j' = acas Xi_j + E xi_bar_{j+1} + rcas zeta, E = col(0, B_j).
      Mat acas_e = Mat::Zero(dim, dnew);
      acas_e.leftCols(dim) = acas;
      acas_e.bottomRightCorner(nf.block_size(j - 1), dj) = nf.B_blocks[ju - 1];
      const Mat g = f_row * w_next - k_prev * acas_e;
      const Mat rbar = nf.R_blocks[ju] - k_prev * rcas;
      res.R_bar.push_back(rbar);

      const double bprev2 = std::pow(norm2(nf.B_blocks[ju - 1]), 2);
      const double rho2 = q * std::pow(norm2(rbar), 2);
      double p = 1.0;
      if (l >= 2) {
        p = p_prev;
        if (rho2 > 0.0) p = std::min(p_prev, std::sqrt(p_prev * bprev2 / rho2));
        if (!(p > 0.0)) p = p_prev;
      }
      res.weights.push_back(p);
      kappa = scale * ((p_prev / p) * bprev2 + (j < l ? 0.25 : 0.0) + p * rho2 +
                       opts.margin);
      res.kappas.push_back(kappa);

      Mat acas_next = Mat::Zero(dnew, dnew);
      acas_next.topRows(dim) = acas_e;
      acas_next.bottomRightCorner(dj, dj) = -kappa * Mat::Identity(dj, dj);
      Mat rcas_next(dnew, rcas.cols());
      rcas_next << rcas, rbar;

      Mat sel = Mat::Zero(dj, dnew);
      sel.rightCols(dj) = Mat::Identity(dj, dj);
      k_prev = b_pinv[ju] * (-kappa * sel - g);
      res.stage_gains.push_back(k_prev);

      w = std::move(w_next);
      acas = std::move(acas_next);
      rcas = std::move(rcas_next);
      dim = dnew;
      p_prev = p;
    }

    const Mat& t = nf.T();
    res.composite_transform = w.triangularView<Eigen::UnitLower>().solve(t);
    res.composite_inverse = t.transpose() * w;
    res.K = k_prev * res.composite_transform;
    res.cascade = acas;
    res.R_cascade = rcas;
    res.C_cascade = Mat::Zero(nf.system.p(), n);
    res.C_cascade.leftCols(d1) = nf.C_xi;

    const ClosedLoop loop = close_loop(nf.system, res.K);
    const Mat& s = res.composite_transform;
    const double cascade_res = rel((s * loop.A - acas * s).norm(),
                                   s.norm() * loop.A.norm() + acas.norm() * s.norm());
    if (cascade_res > 1e-8) {
      std::ostringstream os;
      os << "transformed closed loop deviates from the target cascade ("
         << cascade_res << ")";
      last_failure = os.str();
      continue;
    }
    // The cascade is block upper bidiagonal with spectrum {-kappa_j}, so the
    // verified similarity makes A + B K Hurwitz; eigenvalues of the
    // x-coordinate matrix are unreliable once the gains are large.

    Vec pdiag(n);
    for (Index j = 0; j < nb; ++j) {
      pdiag.segment(nf.block_offset(j), nf.block_size(j))
          .setConstant(0.5 * res.weights[static_cast<size_t>(j)]);
    }
    IosCertificate& cert = res.certificate;
    cert.alpha = 1.0 / (2.0 * gamma);
    cert.beta = 0.5;
    cert.J = s;
    cert.J_inv = res.composite_inverse;
    cert.P_z = pdiag.asDiagonal();
    cert.A_z = acas;
    cert.R_z = rcas;
    cert.C_z = res.C_cascade;
    cert.P = s.transpose() * cert.P_z * s;
    cert.P = 0.5 * (cert.P + cert.P.transpose());

    const CertificateCheck chk = verify_certificate(loop, cert, tol);
    if (chk.ok) return res;
    last_failure = "certificate check failed: " + chk.detail;
  }
  throw Error(ErrorKind::kSynthesisFailure,
              "state-feedback synthesis failed after kappa escalation: " +
                  last_failure);
}

void AugmentedPlant::validate() const {
  base().validate();
  require_square(M, "M");
  require_finite(M, "M");
  require_finite(N, "N");
  require_finite(Q, "Q");
  const Index nz = M.rows();
  if (N.rows() != nz || N.cols() != B.cols() || Q.rows() != B.cols() ||
      Q.cols() != nz) {
    throw Error(ErrorKind::kInvalidInput,
                "augmented plant: M, N, Q dimensions disagree with B");
  }
}

Mat AugmentedPlant::Abar(const Tolerance&) const {
  const Index n = A.rows(), nz = M.rows();
  Mat out = Mat::Zero(n + nz, n + nz);
  out.topLeftCorner(n, n) = A;
  out.topRightCorner(n, nz) = B * Q;
  out.bottomRightCorner(nz, nz) = M + N * Q;
  return out;
}

Mat AugmentedPlant::Bbar() const {
  Mat out(B.rows() + N.rows(), B.cols());
  out << B, N;
  return out;
}

Mat AugmentedPlant::Rbar(const Tolerance& tol) const {
  Mat out(R.rows() + N.rows(), R.cols());
  out << R, N * pinv(B, tol) * R;
  return out;
}

Mat AugmentedPlant::Cbar() const {
  Mat out = Mat::Zero(C.rows(), A.rows() + M.rows());
  out.leftCols(A.rows()) = C;
  return out;
}

ClosedLoop close_loop(const OutputFeedbackController& ctrl) {
  const Index np = ctrl.Abar.rows();
  if (ctrl.Kbar.cols() != np || ctrl.Bbar.rows() != np ||
      ctrl.Cbar.cols() != np || ctrl.L.rows() != np ||
      ctrl.L.cols() != ctrl.Cbar.rows() || ctrl.Rbar.rows() != np ||
      ctrl.Kbar.rows() != ctrl.Bbar.cols()) {
    throw Error(ErrorKind::kInvalidInput, "output-feedback controller dimensions disagree");
  }
  ClosedLoop loop;
  loop.A.resize(2 * np, 2 * np);
  loop.A << ctrl.Abar, ctrl.Bbar * ctrl.Kbar, ctrl.L * ctrl.Cbar,
      ctrl.Abar - ctrl.L * ctrl.Cbar + ctrl.Bbar * ctrl.Kbar;
  loop.R.resize(2 * np, ctrl.Rbar.cols());
  loop.R << ctrl.Rbar, ctrl.Rbar;
  loop.C = Mat::Zero(ctrl.Cbar.rows(), 2 * np);
  loop.C.leftCols(np) = ctrl.Cbar;
  return loop;
}

OutputFeedbackResult synthesize_output_feedback(
    const AugmentedPlant& plant, const StateFeedbackResult& sf,
    const Tolerance& tol) {
  const Index np = plant.A.rows() + plant.M.rows();
  return synthesize_output_feedback(plant, sf, Mat::Identity(np, np), tol);
}

OutputFeedbackResult synthesize_output_feedback(
    const AugmentedPlant& plant, const StateFeedbackResult& sf,
    const Mat& noise_weight, const Tolerance& tol) {
  plant.validate();
  const Index n = plant.A.rows();
  const Index nz = plant.M.rows();
  if (sf.K.rows() != plant.B.cols() || sf.K.cols() != n ||
      sf.composite_transform.rows() != n) {
    throw Error(ErrorKind::kInvalidInput,
                "state-feedback result does not match the plant dimensions");
  }
  if (!is_hurwitz(plant.M)) {
    throw Error(ErrorKind::kAssumptionViolation, "hypothesis violated: M is not Hurwitz");
  }
  if (!pbh_controllable(plant.M, plant.N, tol)) {
    throw Error(ErrorKind::kAssumptionViolation,
                "hypothesis violated: (M, N) is not controllable");
  }
  if (!pbh_detectable(plant.A, plant.C, tol)) {
    throw Error(ErrorKind::kAssumptionViolation,
                "detectability assumption violated: (A, C) is not detectable");
  }
  if (numeric_rank(plant.B, tol) != plant.B.cols()) {
    throw Error(ErrorKind::kAssumptionViolation,
                "hypothesis violated: B does not have full column rank");
  }

  OutputFeedbackResult out;
  OutputFeedbackController& ctrl = out.controller;
  ctrl.Abar = plant.Abar(tol);
  ctrl.Bbar = plant.Bbar();
  ctrl.Cbar = plant.Cbar();
  ctrl.Rbar = plant.Rbar(tol);
  ctrl.Kbar.resize(plant.B.cols(), n + nz);
  ctrl.Kbar << sf.K, -plant.Q;
  try {
    ctrl.L = observer_gain(ctrl.Abar, ctrl.Cbar, noise_weight, tol).L;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kInfeasible) {
      throw Error(ErrorKind::kAssumptionViolation,
                  std::string("augmented pair is not detectable: ") + e.what());
    }
    throw;
  }
  out.closed_loop = close_loop(ctrl);
  // In the structured coordinates below the loop is block triangular with
  // diagonal blocks cascade, M and Abar - L Cbar.
  if (!is_hurwitz(ctrl.Abar - ctrl.L * ctrl.Cbar)) {
    throw Error(ErrorKind::kSynthesisFailure,
                "output-feedback closed loop is not Hurwitz: Abar - L Cbar is not");
  }

  // Certificate in (xi_bar, phi, chi_bar) with phi = z - N B^+ x and
  // chi_bar = chi - col(x, z); the loop is block triangular there.
  const Mat bplus = pinv(plant.B, tol);
  const Mat& s = sf.composite_transform;
  const Mat& s_inv = sf.composite_inverse;
  const Mat fo = ctrl.Abar - ctrl.L * ctrl.Cbar;
  const Mat g = plant.M * plant.N * bplus - plant.N * bplus * plant.A;
  const Mat g_xi = g * s_inv;
  const Mat e = s * plant.B * ctrl.Kbar;
  const Index nc = n + nz;
  const Index dim = 2 * nc;

  const IosCertificate& base = sf.certificate;
  const double alpha = base.alpha;
  const double beta = base.beta;
  const Mat& p_xi = base.P_z;
  const Mat q_xi = sf.cascade.transpose() * p_xi + p_xi * sf.cascade +
                   alpha * sf.C_cascade.transpose() * sf.C_cascade +
                   (1.0 / beta) * p_xi * sf.R_cascade * sf.R_cascade.transpose() * p_xi;
  const double eps = -max_symmetric_eigenvalue(q_xi);
  if (!(eps > 0.0)) {
    throw Error(ErrorKind::kSynthesisFailure,
                "state-feedback certificate has no strict dissipation margin");
  }
  const Mat p_phi = solve_lyapunov(plant.M, Mat::Identity(nz, nz), tol);
  const Mat p_chi = solve_lyapunov(fo, Mat::Identity(nc, nc), tol);
  const double gphi = std::pow(norm2(p_phi * g_xi), 2);
  const double gchi = std::pow(norm2(p_xi * e), 2);
  const double a1 = gphi > 0.0 ? eps / (3.0 * gphi) : 1.0;
  const double a2 = gchi > 0.0 ? 3.0 * gchi / eps : 1.0;

  IosCertificate& cert = out.certificate;
  cert.alpha = alpha;
  cert.beta = beta;
  cert.J = Mat::Zero(dim, dim);
  cert.J.topLeftCorner(n, n) = s;
  cert.J.block(n, 0, nz, n) = -plant.N * bplus;
  cert.J.block(n, n, nz, nz) = Mat::Identity(nz, nz);
  cert.J.bottomLeftCorner(nc, nc) = -Mat::Identity(nc, nc);
  cert.J.bottomRightCorner(nc, nc) = Mat::Identity(nc, nc);

  cert.A_z = Mat::Zero(dim, dim);
  cert.A_z.topLeftCorner(n, n) = sf.cascade;
  cert.A_z.topRightCorner(n, nc) = e;
  cert.A_z.block(n, 0, nz, n) = g_xi;
  cert.A_z.block(n, n, nz, nz) = plant.M;
  cert.A_z.bottomRightCorner(nc, nc) = fo;
  cert.R_z = Mat::Zero(dim, plant.R.cols());
  cert.R_z.topRows(n) = sf.R_cascade;
  cert.C_z = Mat::Zero(plant.C.rows(), dim);
  cert.C_z.leftCols(n) = sf.C_cascade;
  cert.J_inv = Mat::Zero(dim, dim);
  cert.J_inv.topLeftCorner(n, n) = s_inv;
  cert.J_inv.block(n, 0, nz, n) = plant.N * bplus * s_inv;
  cert.J_inv.block(n, n, nz, nz) = Mat::Identity(nz, nz);
  cert.J_inv.bottomLeftCorner(nc, nc) = cert.J_inv.topLeftCorner(nc, nc);
  cert.J_inv.bottomRightCorner(nc, nc) = Mat::Identity(nc, nc);
  cert.P_z = block_diag({p_xi, a1 * p_phi, a2 * p_chi});
  cert.P = cert.J.transpose() * cert.P_z * cert.J;
  cert.P = 0.5 * (cert.P + cert.P.transpose());

  const CertificateCheck chk = verify_certificate(out.closed_loop, cert, tol);
  if (!chk.ok) {
    throw Error(ErrorKind::kSynthesisFailure,
                "output-feedback certificate check failed: " + chk.detail);
  }
  return out;
}

IosCertificate lyapunov_certificate(const ClosedLoop& loop, const Tolerance& tol) {
  require_square(loop.A, "closed-loop A");
  if (!is_hurwitz(loop.A)) {
    throw Error(ErrorKind::kInvalidInput, "certificate requires a Hurwitz loop");
  }
  const Index n = loop.A.rows();
  IosCertificate cert;
  cert.P = solve_lyapunov(loop.A, Mat::Identity(n, n), tol);
  const double nc = norm2(loop.C);
  cert.alpha = nc > 0.0 ? 1.0 / (2.0 * nc * nc) : 1.0;
  const double pr = norm2(cert.P * loop.R);
  cert.beta = 2.0 * pr * pr * (1.0 + 1e-6) + 1e-12;
  return cert;
}

Excitation step_excitation(const Vec& direction) {
  Excitation e;
  e.S = Mat::Zero(1, 1);
  e.H = direction;
  e.w0 = Vec::Ones(1);
  e.label = "step";
  return e;
}

Excitation sinusoid_excitation(double omega, const Vec& cos_dir, const Vec& sin_dir) {
  if (cos_dir.size() != sin_dir.size()) {
    throw Error(ErrorKind::kInvalidInput, "sinusoid directions differ in length");
  }
  Excitation e;
  e.S.resize(2, 2);
  e.S << 0.0, -omega, omega, 0.0;  // w = (cos wt, sin wt)
  e.H.resize(cos_dir.size(), 2);
  e.H << cos_dir, sin_dir;
  e.w0 = Vec::Zero(2);
  e.w0(0) = 1.0;
  std::ostringstream os;
  os << "sinusoid@" << omega;
  e.label = os.str();
  return e;
}

std::vector<Excitation> default_excitations(const ClosedLoop& loop) {
  const Index n = loop.A.rows();
  const Index ell = loop.R.cols();
  std::vector<Excitation> out;
  for (Index i = 0; i < ell; ++i) out.push_back(step_excitation(Vec::Unit(ell, i)));
  if (ell == 0 || loop.C.rows() == 0) return out;

  using Cd = std::complex<double>;
  const Eigen::MatrixXcd a = loop.A.cast<Cd>();
  const Eigen::MatrixXcd r = loop.R.cast<Cd>();
  const Eigen::MatrixXcd c = loop.C.cast<Cd>();
  double best = -1.0;
  double best_w = 0.0;
  Eigen::VectorXcd best_v;
  const Eigen::VectorXcd ev = eigenvalues(loop.A);
  const double top = std::max(1.0, ev.cwiseAbs().maxCoeff());
  const double low = std::max(1e-4, 1e-3 * ev.cwiseAbs().minCoeff());
  const int grid = 240;
  for (int k = 0; k <= grid; ++k) {
    const double w = k == 0 ? 0.0
                            : low * std::pow(10.0 * top / low,
                                             static_cast<double>(k - 1) / (grid - 1));
    Eigen::MatrixXcd shifted = -a;
    shifted.diagonal().array() += Cd(0.0, w);
    const Eigen::MatrixXcd g = c * shifted.partialPivLu().solve(r);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(g, Eigen::ComputeThinV);
    if (svd.singularValues()(0) > best) {
      best = svd.singularValues()(0);
      best_w = w;
      best_v = svd.matrixV().col(0);
    }
  }
  (void)n;
  const Vec vr = best_v.real();
  const Vec vi = best_v.imag();
  if (best_w == 0.0) {
    if (vr.norm() > 0.0) out.push_back(step_excitation(vr / vr.norm()));
    return out;
  }
  out.push_back(sinusoid_excitation(best_w, vr, -vi));
  if (vr.norm() > 0.0) out.push_back(sinusoid_excitation(best_w, vr / vr.norm(), Vec::Zero(ell)));
  if (vi.norm() > 0.0) out.push_back(sinusoid_excitation(best_w, vi / vi.norm(), Vec::Zero(ell)));
  return out;
}

double empirical_gain_estimate(const ClosedLoop& loop,
                               const std::vector<Excitation>& excitations,
                               double horizon, double dt) {
  require_square(loop.A, "closed-loop A");
  if (!is_hurwitz(loop.A)) {
    throw Error(ErrorKind::kInvalidInput, "gain estimate requires a Hurwitz loop");
  }
  if (!(horizon > 0.0) || !(dt > 0.0)) {
    throw Error(ErrorKind::kInvalidInput, "horizon and dt must be positive");
  }
  const Index n = loop.A.rows();
  double worst = 0.0;
  for (const Excitation& ex : excitations) {
    const Index nw = ex.S.rows();
    if (ex.H.rows() != loop.R.cols() || ex.H.cols() != nw || ex.w0.size() != nw) {
      throw Error(ErrorKind::kInvalidInput, "excitation dimensions disagree with the loop");
    }
    const Index na = n + nw;
    Mat aug = Mat::Zero(na, na);
    aug.topLeftCorner(n, n) = loop.A;
    aug.topRightCorner(n, nw) = loop.R * ex.H;
    aug.bottomRightCorner(nw, nw) = ex.S;

    // Exact energy over a step of length h: z^T Q_h z with
    // Q_h = int_0^h e^{A^T s} C^T C e^{A s} ds from the Van Loan block exponential.
    const Eigen::VectorXcd ev = eigenvalues(aug);
    const double rho = std::max(1e-12, ev.cwiseAbs().maxCoeff());
    // The horizon is split into 2^k equal steps no longer than min(dt, 2/rho);
    // the step map and energy Gramians are then doubled k times.
    const double h_max = std::min(dt, 2.0 / rho);
    const int doublings =
        std::max(0, static_cast<int>(std::ceil(std::log2(horizon / h_max))));
    const double h = std::ldexp(horizon, -doublings);
    Mat cy = Mat::Zero(loop.C.rows(), na);
    cy.leftCols(n) = loop.C;
    Mat cz = Mat::Zero(loop.R.cols(), na);
    cz.rightCols(nw) = ex.H;
    Mat vy = Mat::Zero(2 * na, 2 * na);
    vy.topLeftCorner(na, na) = -aug.transpose();
    vy.topRightCorner(na, na) = cy.transpose() * cy;
    vy.bottomRightCorner(na, na) = aug;
    Mat vz = vy;
    vz.topRightCorner(na, na) = cz.transpose() * cz;
    const Mat ey_exp = (vy * h).exp();
    const Mat ez_exp = (vz * h).exp();
    Mat step = ey_exp.bottomRightCorner(na, na);
    Mat qy = step.transpose() * ey_exp.topRightCorner(na, na);
    Mat qz = step.transpose() * ez_exp.topRightCorner(na, na);
    qy = 0.5 * (qy + qy.transpose());
    qz = 0.5 * (qz + qz.transpose());
    for (int k = 0; k < doublings; ++k) {
      qy += step.transpose() * qy * step;
      qz += step.transpose() * qz * step;
      qy = 0.5 * (qy + qy.transpose());
      qz = 0.5 * (qz + qz.transpose());
      step = step * step;
    }

    Vec z = Vec::Zero(na);
    z.tail(nw) = ex.w0;
    const double ey = z.dot(qy * z);
    const double ez = z.dot(qz * z);
    if (ez > 0.0) worst = std::max(worst, ey / ez);
  }
  return worst;
}

double small_gain_bound(double gamma_zeta, Index agents) {
  if (!(gamma_zeta > 0.0) || agents <= 0) {
    throw Error(ErrorKind::kInvalidInput,
                "small-gain bound needs gamma_zeta > 0 and at least one agent");
  }
  return 1.0 / (static_cast<double>(agents) * gamma_zeta);
}

bool small_gain_check(double gamma, double gamma_zeta, Index agents) {
  if (!(gamma > 0.0)) {
    throw Error(ErrorKind::kInvalidInput, "gamma must be positive");
  }
  return gamma < small_gain_bound(gamma_zeta, agents);
}

}  // namespace gammastab
