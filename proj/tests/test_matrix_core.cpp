#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <limits>

#include "gammastab/example_data.hpp"
#include "gammastab/generators.hpp"
#include "gammastab/matrix_core.hpp"
#include "support.hpp"

using namespace gammastab;
using test::max_abs;

namespace {

Mat example_b() { return example_agent().nominal.B; }

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

}  // namespace

TEST_CASE("tolerance defaults and validation") {
  const Tolerance t;
  CHECK(t.rank_tol == 1e-9);
  CHECK(t.eq_tol == 1e-8);
  CHECK(t.psd_tol == 1e-8);
  CHECK_NOTHROW(t.validate());

  Tolerance bad;
  bad.psd_tol = 0.0;
  CHECK(kind_of([&] { bad.validate(); }) == ErrorKind::kInvalidInput);
  bad = {};
  bad.eq_tol = std::numeric_limits<double>::infinity();
  CHECK(kind_of([&] { bad.validate(); }) == ErrorKind::kInvalidInput);
}

TEST_CASE("tolerance overrides from the environment") {
  setenv("GAMMASTAB_RANK_TOL", "1e-7", 1);
  setenv("GAMMASTAB_PSD_TOL", "2e-8", 1);
  const Tolerance t = Tolerance::from_environment();
  CHECK(t.rank_tol == 1e-7);
  CHECK(t.eq_tol == 1e-8);
  CHECK(t.psd_tol == 2e-8);
  unsetenv("GAMMASTAB_RANK_TOL");
  unsetenv("GAMMASTAB_PSD_TOL");
  CHECK(Tolerance::from_environment().rank_tol == 1e-9);
}

TEST_CASE("non-finite input is rejected") {
  Mat m = Mat::Identity(2, 2);
  m(0, 1) = std::nan("");
  CHECK(kind_of([&] { svd_full(m); }) == ErrorKind::kInvalidInput);
  CHECK(kind_of([&] { require_finite(m, "M"); }) == ErrorKind::kInvalidInput);
  CHECK(kind_of([&] { require_square(Mat(2, 3), "M"); }) == ErrorKind::kInvalidInput);
}

TEST_CASE("kron matches the block definition") {
  Mat a(2, 2);
  a << 1, 2, 3, 4;
  const Mat b = Mat::Identity(2, 2);
  const Mat k = kron(a, b);
  REQUIRE(k.rows() == 4);
  CHECK(k(0, 0) == 1);
  CHECK(k(1, 1) == 1);
  CHECK(k(0, 2) == 2);
  CHECK(k(3, 1) == 3);
  CHECK(k(2, 3) == 0);
}

TEST_CASE("svd_full examples") {
  SUBCASE("identity") {
    const Svd s = svd_full(Mat::Identity(3, 3));
    CHECK(max_abs(s.S - Vec::Ones(3)) < 1e-15);
    CHECK(max_abs(s.U * s.H.transpose() - Mat::Identity(3, 3)) < 1e-14);
  }
  SUBCASE("zero 2x3") {
    const Svd s = svd_full(Mat::Zero(2, 3));
    REQUIRE(s.S.size() == 2);
    CHECK(s.S.isZero());
  }
  SUBCASE("example input matrix has singular values 2 and 1") {
    const Svd s = svd_full(example_b());
    REQUIRE(s.S.size() == 2);
    CHECK(s.S(0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(s.S(1) == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("svd_full reconstruction on random matrices") {
  Rng rng(11);
  for (int k = 0; k < 50; ++k) {
    std::uniform_int_distribution<Index> dim(1, 8);
    const Mat m = gaussian(dim(rng), dim(rng), rng);
    const Svd s = svd_full(m);
    Mat sigma = Mat::Zero(m.rows(), m.cols());
    for (Index i = 0; i < s.S.size(); ++i) sigma(i, i) = s.S(i);
    CHECK((s.U * sigma * s.H.transpose() - m).norm() <= 1e-8 * std::max(1.0, m.norm()));
    CHECK(max_abs(s.U.transpose() * s.U - Mat::Identity(m.rows(), m.rows())) < 1e-12);
    CHECK(max_abs(s.H.transpose() * s.H - Mat::Identity(m.cols(), m.cols())) < 1e-12);
    for (Index i = 1; i < s.S.size(); ++i) CHECK(s.S(i) <= s.S(i - 1));
    CHECK(s.S.minCoeff() >= 0.0);
  }
}

TEST_CASE("numeric_rank examples") {
  CHECK(numeric_rank(Mat(Mat::Identity(4, 4))) == 4);
  CHECK(numeric_rank(Mat(Mat::Zero(3, 2))) == 0);
  CHECK(numeric_rank(example_b()) == 2);
  Mat tiny = Mat::Identity(2, 2);
  tiny(1, 1) = 1e-12;
  CHECK(numeric_rank(tiny) == 1);
  // Relative threshold: uniform scaling leaves the rank unchanged.
  CHECK(numeric_rank(Mat(1e-20 * Mat::Identity(3, 3))) == 3);
}

TEST_CASE("numeric_rank agrees with a pivoted QR on low-rank products") {
  Rng rng(12);
  for (int k = 0; k < 40; ++k) {
    std::uniform_int_distribution<Index> dim(1, 7);
    const Index r = dim(rng), rows = dim(rng) + 1, cols = dim(rng) + 1;
    const Mat m = gaussian(rows, r, rng) * gaussian(r, cols, rng);
    CHECK(numeric_rank(m) == test::qr_rank(m));
  }
}

TEST_CASE("pinv examples") {
  CHECK(max_abs(pinv(Mat::Identity(2, 2)) - Mat::Identity(2, 2)) < 1e-15);
  Vec col(4);
  col << 0, 0, 2, 0;
  const Mat p = pinv(Mat(col));
  REQUIRE(p.rows() == 1);
  Mat expected(1, 4);
  expected << 0, 0, 0.5, 0;
  CHECK(max_abs(p - expected) < 1e-15);

  Mat bplus(2, 4);
  bplus << 0, 0, 0.5, 0, 0, 1, 0, 0;
  CHECK(max_abs(pinv(example_b()) - bplus) < 1e-15);
  CHECK(max_abs(pinv(example_b()) * example_b() - Mat::Identity(2, 2)) < 1e-8);
}

TEST_CASE("pinv satisfies the Penrose identities") {
  Rng rng(13);
  for (int k = 0; k < 100; ++k) {
    std::uniform_int_distribution<Index> dim(1, 8);
    const Index rows = dim(rng), cols = dim(rng);
    Mat m = gaussian(rows, cols, rng);
    if (k % 3 == 0) {
      const Index r = std::max<Index>(1, std::min(rows, cols) - 1);
      m = gaussian(rows, r, rng) * gaussian(r, cols, rng);
    }
    const Mat p = pinv(m);
    CHECK((p * m * p - p).norm() <= 1e-8);
    CHECK((m * p * m - m).norm() <= 1e-8);
    CHECK(((m * p).transpose() - m * p).norm() <= 1e-8);
    CHECK(((p * m).transpose() - p * m).norm() <= 1e-8);
  }
}

TEST_CASE("solve_sylvester examples") {
  const Mat t1 = solve_sylvester(Mat::Zero(1, 1), -Mat::Identity(1, 1), Mat::Ones(1, 1));
  CHECK(t1(0, 0) == doctest::Approx(1.0));
  const Mat t2 = solve_sylvester(Mat::Identity(2, 2), -Mat::Identity(2, 2), Mat::Zero(2, 2));
  CHECK(t2.isZero());
  CHECK(kind_of([] {
          solve_sylvester(Mat::Identity(2, 2), Mat::Identity(2, 2), Mat::Ones(2, 2));
        }) == ErrorKind::kNoUniqueSolution);
}

TEST_CASE("solve_sylvester residual on random disjoint spectra") {
  Rng rng(14);
  for (int k = 0; k < 100; ++k) {
    std::uniform_int_distribution<Index> dim(1, 8);
    const Index nf = dim(rng), nm = dim(rng);
    Mat f = gaussian(nf, nf, rng);
    f.diagonal().array() += spectral_abscissa(-f) + 0.5;  // spectrum in Re >= 0.5
    const Mat m = random_hurwitz(nm, rng);
    const Mat q = gaussian(nm, nf, rng);
    const Mat t = solve_sylvester(f, m, q);
    CHECK((t * f - m * t - q).norm() <= 1e-8 * std::max(1.0, q.norm()));
  }
}

TEST_CASE("solve_lyapunov residual") {
  Rng rng(15);
  for (int k = 0; k < 30; ++k) {
    const Mat a = random_hurwitz(1 + k % 6, rng);
    const Mat q = Mat::Identity(a.rows(), a.rows());
    const Mat p = solve_lyapunov(a, q);
    CHECK((a.transpose() * p + p * a + q).norm() <= 1e-8 * std::max(1.0, p.norm()));
    CHECK(Eigen::SelfAdjointEigenSolver<Mat>(p).eigenvalues().minCoeff() > 0.0);
  }
  CHECK(kind_of([] { solve_lyapunov(Mat::Identity(2, 2), Mat::Identity(2, 2)); }) ==
        ErrorKind::kInvalidInput);
}

TEST_CASE("observer_gain examples") {
  SUBCASE("scalar Riccati -P^2 + 1 = 0") {
    const ObserverGain g = observer_gain(Mat::Zero(1, 1), Mat::Ones(1, 1), Mat::Ones(1, 1));
    CHECK(g.P(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(g.L(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("stable plant stays stable") {
    const ObserverGain g = observer_gain(-Mat::Identity(2, 2), Mat::Identity(2, 2));
    CHECK(is_hurwitz(-Mat::Identity(2, 2) - g.L));
  }
  SUBCASE("double integrator") {
    Mat a(2, 2);
    a << 0, 1, 0, 0;
    Mat c(1, 2);
    c << 1, 0;
    const ObserverGain g = observer_gain(a, c, Mat::Identity(2, 2));
    CHECK(spectral_abscissa(a - g.L * c) < 0.0);
    const Mat res = a * g.P + g.P * a.transpose() - g.P * c.transpose() * c * g.P +
                    Mat::Identity(2, 2);
    CHECK(res.norm() < 1e-10);
  }
  SUBCASE("undetectable pair") {
    const Mat a = Mat::Identity(2, 2);
    Mat c(1, 2);
    c << 1, 0;
    CHECK(kind_of([&] { observer_gain(a, c); }) == ErrorKind::kInfeasible);
  }
}

TEST_CASE("observer_gain stabilizes random detectable pairs") {
  Rng rng(16);
  int tested = 0;
  while (tested < 60) {
    std::uniform_int_distribution<Index> dim(1, 6);
    const Index n = dim(rng), p = dim(rng);
    const Mat a = gaussian(n, n, rng);
    const Mat c = gaussian(std::min(p, n), n, rng);
    if (!pbh_detectable(a, c)) continue;
    ++tested;
    const ObserverGain g = observer_gain(a, c);
    CHECK(spectral_abscissa(a - g.L * c) < 0.0);
  }
}

TEST_CASE("minimal_polynomial examples") {
  CHECK(minimal_polynomial(Mat::Zero(3, 3)) == std::vector<double>{0.0});
  const auto id = minimal_polynomial(Mat::Identity(2, 2));
  REQUIRE(id.size() == 1);
  CHECK(id[0] == doctest::Approx(-1.0).epsilon(1e-14));
  const auto c = minimal_polynomial(bundled_example().A_o);
  REQUIRE(c.size() == 2);
  CHECK(std::abs(c[0]) < 1e-14);
  CHECK(c[1] == doctest::Approx(0.25).epsilon(1e-14));

  Mat rot = Mat::Zero(3, 3);
  rot(1, 2) = 1.0;
  rot(2, 1) = -1.0;
  const auto r = minimal_polynomial(rot);
  REQUIRE(r.size() == 3);
  CHECK(std::abs(r[0]) < 1e-12);
  CHECK(r[1] == doctest::Approx(1.0));
  CHECK(std::abs(r[2]) < 1e-12);
}

TEST_CASE("minimal_polynomial annihilates its matrix") {
  Rng rng(17);
  for (int k = 0; k < 40; ++k) {
    std::uniform_int_distribution<Index> dim(1, 4);
    const Index n = dim(rng);
    Mat base = gaussian(n, n, rng);
    Mat a = base;
    const Index expected = n;
    if (k % 2 == 1) {
      // Two copies of the same block, conjugated: the degree stays n.
      const Mat q = random_orthogonal(2 * n, rng);
      Mat blk = Mat::Zero(2 * n, 2 * n);
      blk.topLeftCorner(n, n) = base;
      blk.bottomRightCorner(n, n) = base;
      a = q.transpose() * blk * q;
    }
    const auto coeffs = minimal_polynomial(a);
    CHECK(static_cast<Index>(coeffs.size()) == expected);
    const double scale = std::pow(std::max(1.0, a.norm()), static_cast<double>(coeffs.size()));
    CHECK(evaluate_monic_polynomial(a, coeffs).norm() <= 1e-6 * scale);
  }
}

TEST_CASE("pbh_controllable examples") {
  Mat a(2, 2);
  a << 0, 1, 0, 0;
  CHECK(pbh_controllable(a, Vec::Unit(2, 1)));
  CHECK_FALSE(pbh_controllable(Mat::Identity(2, 2), Vec::Ones(2)));
  const AgentMatrices ex = example_agent().nominal;
  CHECK(pbh_controllable(ex.A, ex.B));
}

TEST_CASE("pbh_controllable agrees with the Kalman rank test") {
  Rng rng(18);
  int uncontrollable = 0;
  for (int k = 0; k < 300; ++k) {
    std::uniform_int_distribution<Index> dim(1, 6);
    const Index n = dim(rng);
    const Index m = std::uniform_int_distribution<Index>(1, n)(rng);
    Mat a = test::integer_matrix(n, n, rng);
    Mat b = test::integer_matrix(n, m, rng);
    if (k % 3 == 0 && n > 1) {
      // Block-triangular with an unreachable lower block.
      const Index r = std::uniform_int_distribution<Index>(1, n - 1)(rng);
      a.bottomLeftCorner(n - r, r).setZero();
      b.bottomRows(n - r).setZero();
    }
    const bool kalman = test::qr_rank(test::kalman_matrix(a, b)) == n;
    uncontrollable += kalman ? 0 : 1;
    CHECK(pbh_controllable(a, b) == kalman);
  }
  CHECK(uncontrollable > 50);
}

TEST_CASE("pbh_detectable and pbh_observable") {
  Mat c(1, 2);
  c << 1, 0;
  CHECK_FALSE(pbh_detectable(Mat::Identity(2, 2), c));
  Mat a(2, 2);
  a << 1, 0, 0, -1;
  CHECK(pbh_detectable(a, c));
  CHECK_FALSE(pbh_observable(a, c));
  Mat rot(2, 2);
  rot << 0, 0.5, -0.5, 0;
  CHECK(pbh_observable(rot, c));
}

TEST_CASE("spectral_abscissa examples") {
  CHECK(spectral_abscissa(-Mat::Identity(3, 3)) == doctest::Approx(-1.0));
  Mat rot(2, 2);
  rot << 0, 1, -1, 0;
  CHECK(std::abs(spectral_abscissa(rot)) < 1e-14);
  CHECK(spectral_abscissa(bundled_example().M) == doctest::Approx(-0.5));
  CHECK(is_hurwitz(-Mat::Identity(2, 2), 0.5));
  CHECK_FALSE(is_hurwitz(-Mat::Identity(2, 2), 1.0));
}

TEST_CASE("is_negative_semidefinite examples") {
  CHECK(is_negative_semidefinite(-Mat::Identity(2, 2)));
  Mat swap(2, 2);
  swap << 0, 1, 1, 0;
  CHECK_FALSE(is_negative_semidefinite(swap));
  Mat edge(2, 2);
  edge << -0.5, 0.5, 0.5, -0.5;
  CHECK(is_negative_semidefinite(edge));
  CHECK(max_symmetric_eigenvalue(edge) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("norm2 is the largest singular value") {
  Mat m(2, 2);
  m << 3, 0, 0, -4;
  CHECK(norm2(m) == doctest::Approx(4.0));
}
