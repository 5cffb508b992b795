#include "gammastab/matrix_core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <string>

namespace gammastab {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput: return "invalid-input";
    case ErrorKind::kNoUniqueSolution: return "no-unique-solution";
    case ErrorKind::kNumericalFailure: return "numerical-failure";
    case ErrorKind::kInfeasible: return "infeasible";
    case ErrorKind::kAssumptionViolation: return "assumption-violation";
    case ErrorKind::kTransmissionZero: return "transmission-zero";
    case ErrorKind::kSynthesisFailure: return "synthesis-failure";
    case ErrorKind::kDesignRejection: return "design-rejection";
    case ErrorKind::kInternalConsistency: return "internal-consistency";
    case ErrorKind::kDivergence: return "divergence";
    case ErrorKind::kNoFrequency: return "no-frequency";
  }
  return "unknown";
}

void Tolerance::validate() const {
  for (double v : {rank_tol, eq_tol, psd_tol}) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorKind::kInvalidInput,
                  "tolerances must be strictly positive and finite");
    }
  }
}

namespace {

void override_from_env(const char* name, double& field) {
  const char* raw = std::getenv(name);
  if (raw == nullptr || *raw == '\0') return;
  char* end = nullptr;
  const double value = std::strtod(raw, &end);
  if (end == raw || *end != '\0' || !(value > 0.0) || !std::isfinite(value)) {
    throw Error(ErrorKind::kInvalidInput,
                std::string("environment variable ") + name +
                    " must be a positive number, got '" + raw + "'");
  }
  field = value;
}

}  // namespace

Tolerance Tolerance::from_environment() {
  Tolerance tol;
  override_from_env("GAMMASTAB_RANK_TOL", tol.rank_tol);
  override_from_env("GAMMASTAB_EQ_TOL", tol.eq_tol);
  override_from_env("GAMMASTAB_PSD_TOL", tol.psd_tol);
  return tol;
}

void require_finite(const Mat& m, const char* what) {
  if (!m.allFinite()) {
    throw Error(ErrorKind::kInvalidInput,
                std::string(what) + " has non-finite entries");
  }
}

void require_square(const Mat& m, const char* what) {
  if (m.rows() != m.cols()) {
    std::ostringstream os;
    os << what << " must be square, got " << m.rows() << "x" << m.cols();
    throw Error(ErrorKind::kInvalidInput, os.str());
  }
}

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Svd svd_full(const Mat& m) {
  require_finite(m, "svd input");
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

namespace {

template <typename Values>
Index count_above(const Values& s, double rank_tol) {
  if (s.size() == 0) return 0;
  const double largest = s.maxCoeff();
  if (largest <= 0.0) return 0;
  const double cut = rank_tol * largest;
  Index r = 0;
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > cut) ++r;
  }
  return r;
}

}  // namespace

Index numeric_rank(const Mat& m, const Tolerance& tol) {
  require_finite(m, "rank input");
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(m);
  return count_above(svd.singularValues(), tol.rank_tol);
}

Index numeric_rank(const Eigen::MatrixXcd& m, const Tolerance& tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  return count_above(svd.singularValues(), tol.rank_tol);
}

Mat pinv(const Mat& m, const Tolerance& tol) {
  require_finite(m, "pinv input");
  Mat out = Mat::Zero(m.cols(), m.rows());
  if (m.size() == 0) return out;
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec& s = svd.singularValues();
  const Index r = count_above(s, tol.rank_tol);
  for (Index i = 0; i < r; ++i) {
    out += svd.matrixV().col(i) * (1.0 / s(i)) *
           svd.matrixU().col(i).transpose();
  }
  return out;
}

Eigen::VectorXcd eigenvalues(const Mat& a) {
  require_square(a, "eigenvalue input");
  require_finite(a, "eigenvalue input");
  if (a.size() == 0) return Eigen::VectorXcd();
  Eigen::EigenSolver<Mat> es(a, false);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorKind::kNumericalFailure,
                "nonsymmetric eigenvalue iteration did not converge");
  }
  return es.eigenvalues();
}

double norm2(const Mat& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(0);
}

Mat solve_sylvester(const Mat& f, const Mat& m, const Mat& q,
                    const Tolerance& tol) {
  require_square(f, "Sylvester F");
  require_square(m, "Sylvester M");
  require_finite(f, "Sylvester F");
  require_finite(m, "Sylvester M");
  require_finite(q, "Sylvester Q");
  const Index rows = m.rows();
  const Index cols = f.rows();
  if (q.rows() != rows || q.cols() != cols) {
    throw Error(ErrorKind::kInvalidInput,
                "Sylvester dimensions incompatible with T*F - M*T = Q");
  }
  if (rows == 0 || cols == 0) return Mat::Zero(rows, cols);

  const Eigen::VectorXcd ef = eigenvalues(f);
  const Eigen::VectorXcd em = eigenvalues(m);
  const double scale = std::max({1.0, f.norm(), m.norm()});
  double separation = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < ef.size(); ++i) {
    for (Index j = 0; j < em.size(); ++j) {
      separation = std::min(separation, std::abs(ef(i) - em(j)));
    }
  }
  if (separation <= tol.eq_tol * scale) {
    throw Error(ErrorKind::kNoUniqueSolution,
                "Sylvester equation has overlapping spectra");
  }

  const Mat op = kron(f.transpose(), Mat::Identity(rows, rows)) -
                 kron(Mat::Identity(cols, cols), m);
  Eigen::FullPivLU<Mat> lu(op);
  if (!lu.isInvertible()) {
    throw Error(ErrorKind::kNumericalFailure,
                "Sylvester Kronecker system is numerically singular");
  }
  const Vec rhs = Eigen::Map<const Vec>(q.data(), q.size());
  const Vec sol = lu.solve(rhs);
  Mat t = Eigen::Map<const Mat>(sol.data(), rows, cols);

  const double residual = (t * f - m * t - q).norm();
  if (!(residual <= tol.eq_tol * std::max(1.0, q.norm()) *
                        std::max(1.0, t.norm() * scale / std::max(1.0, q.norm())))) {
    throw Error(ErrorKind::kNumericalFailure,
                "Sylvester solution residual above tolerance");
  }
  return t;
}

Mat solve_lyapunov(const Mat& a, const Mat& q, const Tolerance& tol) {
  require_square(a, "Lyapunov A");
  if (!is_hurwitz(a)) {
    throw Error(ErrorKind::kInvalidInput, "Lyapunov equation needs Hurwitz A");
  }
  // A^T P + P A = -Q  <=>  P*A - (-A^T)*P = -Q.
  Mat p = solve_sylvester(a, -a.transpose(), -q, tol);
  return 0.5 * (p + p.transpose());
}

ObserverGain observer_gain(const Mat& a, const Mat& c, const Tolerance& tol) {
  return observer_gain(a, c, Mat::Identity(a.rows(), a.rows()), tol);
}

ObserverGain observer_gain(const Mat& a, const Mat& c, const Mat& noise_weight,
                           const Tolerance& tol) {
  require_square(a, "observer A");
  require_finite(a, "observer A");
  require_finite(c, "observer C");
  require_finite(noise_weight, "noise weight");
  const Index n = a.rows();
  if (c.cols() != n || noise_weight.rows() != n || noise_weight.cols() != n) {
    throw Error(ErrorKind::kInvalidInput, "observer dimensions mismatch");
  }
  if ((noise_weight - noise_weight.transpose()).norm() >
      tol.eq_tol * std::max(1.0, noise_weight.norm())) {
    throw Error(ErrorKind::kInvalidInput, "noise weight must be symmetric");
  }
  const Mat w = 0.5 * (noise_weight + noise_weight.transpose());
  if (n == 0) return {Mat::Zero(0, c.rows()), Mat::Zero(0, 0)};
  Eigen::SelfAdjointEigenSolver<Mat> wes(w);
  if (wes.eigenvalues().minCoeff() <= 0.0) {
    throw Error(ErrorKind::kInvalidInput,
                "noise weight must be positive definite");
  }
  if (!pbh_detectable(a, c, tol)) {
    throw Error(ErrorKind::kInfeasible,
                "(A, C) is not detectable; no stabilizing observer exists");
  }

  Mat ham(2 * n, 2 * n);
  ham << a.transpose(), -c.transpose() * c, -w, -a;

  const Eigen::VectorXcd hev = eigenvalues(ham);
  const double scale = std::max(1.0, ham.norm());
  for (Index i = 0; i < hev.size(); ++i) {
    if (std::abs(hev(i).real()) <= tol.eq_tol * scale) {
      throw Error(ErrorKind::kNumericalFailure,
                  "Hamiltonian has eigenvalues on the imaginary axis");
    }
  }

  // Matrix sign function by scaled Newton iteration; the stable invariant
  // subspace of the Hamiltonian is ker(sign(H) + I).
  Mat z = ham;
  bool converged = false;
  for (int iter = 0; iter < 100; ++iter) {
    Eigen::PartialPivLU<Mat> lu(z);
    const Mat zinv = lu.inverse();
    double log_det = 0.0;
    for (Index i = 0; i < z.rows(); ++i) {
      log_det += std::log(std::abs(lu.matrixLU()(i, i)));
    }
    const double mu = std::exp(-log_det / static_cast<double>(2 * n));
    Mat next = 0.5 * (mu * z + zinv / mu);
    if (!next.allFinite()) break;
    const double change = (next - z).lpNorm<1>();
    z = std::move(next);
    if (change <= 1e-13 * z.lpNorm<1>()) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw Error(ErrorKind::kNumericalFailure,
                "matrix sign iteration for the Riccati equation did not converge");
  }

  const Mat id = Mat::Identity(n, n);
  Mat lhs(2 * n, n), rhs(2 * n, n);
  lhs << z.topRightCorner(n, n), z.bottomRightCorner(n, n) + id;
  rhs << -(z.topLeftCorner(n, n) + id), -z.bottomLeftCorner(n, n);
  Mat p = lhs.colPivHouseholderQr().solve(rhs);
  p = 0.5 * (p + p.transpose());

  const Mat residual = a * p + p * a.transpose() -
                       p * c.transpose() * c * p + w;
  const double res_scale =
      std::max(1.0, 2.0 * a.norm() * p.norm() +
                        p.norm() * p.norm() * c.norm() * c.norm() + w.norm());
  if (!(residual.norm() <= 1e-7 * res_scale)) {
    throw Error(ErrorKind::kNumericalFailure,
                "filter Riccati residual above tolerance");
  }
  Mat l = p * c.transpose();
  if (!is_hurwitz(a - l * c)) {
    throw Error(ErrorKind::kNumericalFailure,
                "Riccati observer gain failed to stabilize A - L C");
  }
  return {std::move(l), std::move(p)};
}

std::vector<double> minimal_polynomial(const Mat& a, const Tolerance& tol) {
  require_square(a, "minimal polynomial input");
  require_finite(a, "minimal polynomial input");
  const Index n = a.rows();
  if (n == 0) return {};
  const double scale = a.norm();
  if (scale == 0.0) return {0.0};

  // Work with A / ||A|| so the acceptance threshold is scale free, then
  // rescale the coefficients: alpha_k = beta_k * ||A||^k.
  const Mat b = a / scale;
  std::vector<Mat> powers{Mat::Identity(n, n)};
  for (Index s = 1; s <= n; ++s) {
    powers.push_back(powers.back() * b);
    Mat basis(n * n, s);
    for (Index k = 0; k < s; ++k) {
      const Mat& pk = powers[static_cast<size_t>(s - 1 - k)];
      basis.col(k) = Eigen::Map<const Vec>(pk.data(), pk.size());
    }
    const Mat& top = powers.back();
    const Vec target = -Eigen::Map<const Vec>(top.data(), top.size());
    const Vec beta = basis.completeOrthogonalDecomposition().solve(target);
    const double residual = (basis * beta - target).norm();
    const double threshold = tol.eq_tol * std::sqrt(static_cast<double>(n)) *
                             std::max(1.0, beta.lpNorm<1>());
    if (residual <= threshold || s == n) {
      std::vector<double> coeffs(static_cast<size_t>(s));
      double factor = 1.0;
      for (Index k = 0; k < s; ++k) {
        factor *= scale;
        coeffs[static_cast<size_t>(k)] = beta(k) * factor;
      }
      return coeffs;
    }
  }
  return {};  // unreachable: s == n always accepts
}

Mat evaluate_monic_polynomial(const Mat& a, const std::vector<double>& coeffs) {
  require_square(a, "polynomial argument");
  const Index n = a.rows();
  // Horner: ((A + a1 I) A + a2 I) A + ...
  Mat acc = Mat::Identity(n, n);
  for (double c : coeffs) {
    acc = acc * a + c * Mat::Identity(n, n);
  }
  return acc;
}

namespace {

Eigen::MatrixXcd shifted(const Mat& a, std::complex<double> lambda) {
  Eigen::MatrixXcd out = -a.cast<std::complex<double>>();
  out.diagonal().array() += lambda;
  return out;
}

}  // namespace

bool pbh_controllable(const Mat& a, const Mat& b, const Tolerance& tol) {
  require_square(a, "PBH A");
  if (b.rows() != a.rows()) {
    throw Error(ErrorKind::kInvalidInput, "PBH: B row count must match A");
  }
  const Index n = a.rows();
  const Eigen::VectorXcd ev = eigenvalues(a);
  for (Index i = 0; i < ev.size(); ++i) {
    Eigen::MatrixXcd test(n, n + b.cols());
    test << shifted(a, ev(i)), b.cast<std::complex<double>>();
    if (numeric_rank(test, tol) < n) return false;
  }
  return true;
}

namespace {

bool pbh_observable_filtered(const Mat& a, const Mat& c, const Tolerance& tol,
                             bool unstable_only) {
  require_square(a, "PBH A");
  if (c.cols() != a.rows()) {
    throw Error(ErrorKind::kInvalidInput, "PBH: C column count must match A");
  }
  const Index n = a.rows();
  const Eigen::VectorXcd ev = eigenvalues(a);
  const double slack = tol.eq_tol * std::max(1.0, a.norm());
  for (Index i = 0; i < ev.size(); ++i) {
    if (unstable_only && ev(i).real() < -slack) continue;
    Eigen::MatrixXcd test(n + c.rows(), n);
    test << shifted(a, ev(i)), c.cast<std::complex<double>>();
    if (numeric_rank(test, tol) < n) return false;
  }
  return true;
}

}  // namespace

bool pbh_detectable(const Mat& a, const Mat& c, const Tolerance& tol) {
  return pbh_observable_filtered(a, c, tol, true);
}

bool pbh_observable(const Mat& a, const Mat& c, const Tolerance& tol) {
  return pbh_observable_filtered(a, c, tol, false);
}

double spectral_abscissa(const Mat& a) {
  const Eigen::VectorXcd ev = eigenvalues(a);
  if (ev.size() == 0) return -std::numeric_limits<double>::infinity();
  return ev.real().maxCoeff();
}

double max_symmetric_eigenvalue(const Mat& m) {
  require_square(m, "symmetric eigenvalue input");
  require_finite(m, "symmetric eigenvalue input");
  if (m.size() == 0) return -std::numeric_limits<double>::infinity();
  const Mat sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(sym, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorKind::kNumericalFailure,
                "symmetric eigenvalue iteration did not converge");
  }
  return es.eigenvalues().maxCoeff();
}

bool is_negative_semidefinite(const Mat& m, const Tolerance& tol) {
  return max_symmetric_eigenvalue(m) <= tol.psd_tol;
}

}  // namespace gammastab
