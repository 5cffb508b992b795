#include "doctest.h"

#include <cmath>
#include <numeric>

#include "gammastab/example_data.hpp"
#include "gammastab/generators.hpp"
#include "gammastab/normal_form.hpp"
#include "support.hpp"

using namespace gammastab;
using test::kalman_matrix;
using test::max_abs;
using test::qr_rank;

namespace {

LinearSystem example_system() {
  const AgentMatrices m = example_agent().nominal;
  return {m.A, m.B, m.C, Mat::Identity(4, 4)};
}

LinearSystem triple_integrator(const Mat& c) {
  Mat a = Mat::Zero(3, 3);
  a(0, 1) = 1.0;
  a(1, 2) = 1.0;
  Mat b = Mat::Zero(3, 1);
  b(2, 0) = 1.0;
  return {a, b, c, b};
}

Mat row(std::initializer_list<double> v) {
  Mat m(1, static_cast<Index>(v.size()));
  Index k = 0;
  for (double x : v) m(0, k++) = x;
  return m;
}

// Rebuilds T A T^T block by block without going through assembled_A.
double block_structure_residual(const NormalForm& nf) {
  const Mat f = nf.T() * nf.system.A * nf.T().transpose();
  double worst = 0.0;
  for (Index j = 0; j < nf.blocks(); ++j) {
    for (Index k = j + 2; k < nf.blocks(); ++k) {
      worst = std::max(worst, max_abs(f.block(nf.block_offset(j), nf.block_offset(k),
                                              nf.block_size(j), nf.block_size(k))));
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("identity input needs no reduction") {
  Mat a(3, 3);
  a << 1, 2, 3, 4, 5, 6, 7, 8, 10;
  const LinearSystem sys{a, Mat::Identity(3, 3), row({1, 0, 0}), Mat::Zero(3, 1)};
  const NormalForm nf = normal_form(sys);
  CHECK(nf.l == 0);
  CHECK(nf.ranks == std::vector<Index>{3});
  CHECK(max_abs(nf.T() - Mat::Identity(3, 3)) == 0.0);
  CHECK(max_abs(nf.A_blocks[0] - a) == 0.0);
  CHECK(max_abs(nf.B_blocks[0] - Mat::Identity(3, 3)) == 0.0);
}

TEST_CASE("triple integrator") {
  const NormalForm nf = normal_form(triple_integrator(row({1, 0, 0})));
  CHECK(nf.l == 2);
  CHECK(nf.ranks == std::vector<Index>{1, 1, 1});
  CHECK(max_abs(nf.T() * nf.T().transpose() - Mat::Identity(3, 3)) < 1e-14);
  // Each block is a signed coordinate: xi_1 ~ x1, xi_2 ~ x2, xi_3 ~ x3.
  for (Index j = 0; j < 3; ++j) {
    CHECK(std::abs(std::abs(nf.T()(j, j)) - 1.0) < 1e-14);
    CHECK(std::abs(nf.A_blocks[static_cast<size_t>(j)](0, 0)) < 1e-14);
    CHECK(std::abs(std::abs(nf.B_blocks[static_cast<size_t>(j)](0, 0)) - 1.0) < 1e-14);
  }
  CHECK(std::abs(std::abs(nf.C_xi(0, 0)) - 1.0) < 1e-14);
}

TEST_CASE("four-state agent") {
  const LinearSystem sys = example_system();
  const NormalForm nf = normal_form(sys);
  CHECK(nf.l == 1);
  CHECK(nf.ranks.front() == 2);
  CHECK(nf.transform.heights == std::vector<Index>{2, 2});
  const Mat f = nf.assembled_A();
  CHECK(max_abs(nf.T().transpose() * f * nf.T() - sys.A) < 1e-10);
  Mat tb = Mat::Zero(4, 2);
  tb.bottomRows(2) = nf.B_blocks.back();
  CHECK(max_abs(nf.T().transpose() * tb - sys.B) < 1e-10);
  CHECK(max_abs(nf.C_xi * nf.transform.block(0) - sys.C) < 1e-10);
}

TEST_CASE("assumption report") {
  const LinearSystem ex = example_system();
  CHECK(max_abs(ex.C * ex.B) == 0.0);
  const AssumptionReport rep = check_assumptions(ex, 1);
  CHECK(rep.controllable);
  CHECK(rep.level_condition);
  CHECK(rep.ok_for_state_feedback());

  const LinearSystem ti = triple_integrator(row({1, 0, 0}));
  CHECK(check_assumptions(ti, 2).level_condition);

  // Output equal to the input direction violates the level condition at j = 1.
  const LinearSystem bad = triple_integrator(row({0, 0, 1}));
  const AssumptionReport r2 = check_assumptions(bad, 2);
  CHECK_FALSE(r2.level_condition);
  CHECK(r2.level_failure == 1);
  CHECK(r2.controllable);

  // Relative degree two: C A B != 0 with l = 2.
  const AssumptionReport r3 = check_assumptions(triple_integrator(row({0, 1, 0})), 2);
  CHECK_FALSE(r3.level_condition);
  CHECK(r3.level_failure == 2);

  try {
    normal_form(bad);
    FAIL("expected a violation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kAssumptionViolation);
  }
}

TEST_CASE("uncontrollable pair is rejected") {
  Mat a = Mat::Zero(2, 2);
  a(0, 0) = 1.0;
  a(1, 1) = 2.0;
  Mat b(2, 1);
  b << 1.0, 0.0;
  try {
    svd_reduction_chain(a, b);
    FAIL("expected a violation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kAssumptionViolation);
  }
  const AssumptionReport rep =
      check_assumptions({a, b, row({1, 0}), Mat::Zero(2, 1)}, 0);
  CHECK_FALSE(rep.controllable);
  CHECK_FALSE(rep.ok_for_state_feedback());

  try {
    svd_reduction_chain(a, Mat::Zero(2, 1));
    FAIL("expected a violation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kAssumptionViolation);
  }
}

TEST_CASE("inconsistent dimensions are invalid input") {
  LinearSystem sys = example_system();
  sys.C = Mat::Zero(2, 3);
  try {
    sys.validate();
    FAIL("expected invalid input");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kInvalidInput);
  }
}

TEST_CASE("reduction chain on random controllable pairs") {
  Rng rng(101);
  std::uniform_int_distribution<Index> pick_n(1, 7);
  for (int k = 0; k < 200; ++k) {
    const Index n = pick_n(rng);
    std::uniform_int_distribution<Index> pick_m(1, n);
    const Index m = pick_m(rng);
    Mat a, b;
    random_controllable_pair(n, m, rng, a, b);
    const SvdChain chain = svd_reduction_chain(a, b);

    CHECK(chain.ranks.size() == static_cast<size_t>(chain.l + 1));
    CHECK(std::accumulate(chain.ranks.begin(), chain.ranks.end(), Index{0}) == n);
    for (Index j = 0; j <= chain.l; ++j) {
      const Mat& phi = chain.phi(j);
      const Mat& gamma = chain.gamma(j);
      // Rank from an independent factorization.
      CHECK(qr_rank(gamma) == chain.ranks[static_cast<size_t>(j)]);
      // Controllability survives every reduction step (Kalman oracle).
      CHECK(qr_rank(kalman_matrix(phi, gamma)) == phi.rows());
      if (j < chain.l) {
        const ChainStep& st = chain.steps[static_cast<size_t>(j)];
        CHECK(chain.ranks[static_cast<size_t>(j)] < gamma.rows());
        CHECK(max_abs(st.U.transpose() * st.U - Mat::Identity(gamma.rows(), gamma.rows())) < 1e-12);
        CHECK(max_abs(st.U_bar.transpose() * gamma) < 1e-9 * std::max(1.0, gamma.norm()));
        CHECK(max_abs(chain.phi(j + 1) - st.U_bar.transpose() * phi * st.U_bar) < 1e-12 * std::max(1.0, phi.norm()));
        CHECK(max_abs(chain.gamma(j + 1) - st.U_bar.transpose() * phi * st.U_tilde) < 1e-12 * std::max(1.0, phi.norm()));
      } else {
        CHECK(qr_rank(gamma) == gamma.rows());
      }
    }
  }
}

TEST_CASE("normal form of generated systems") {
  Rng rng(202);
  for (int k = 0; k < 150; ++k) {
    const NormalFormRecipe recipe = random_recipe(rng, 3, 3);
    const GeneratedSystem g = generate_normal_form_system(recipe, rng);
    const NormalForm nf = normal_form(g.sys);
    const Index n = g.sys.n();
    const double scale = std::max(1.0, g.sys.A.norm());

    CHECK(nf.l == g.l);
    CHECK(nf.transform.heights == g.block_sizes);
    CHECK(max_abs(nf.T() * nf.T().transpose() - Mat::Identity(n, n)) < 1e-12);
    CHECK(block_structure_residual(nf) < 1e-10 * scale);
    CHECK(max_abs(nf.T() * g.sys.A * nf.T().transpose() - nf.assembled_A()) < 1e-10 * scale);

    const Mat tb = nf.T() * g.sys.B;
    const Index last = nf.block_size(nf.l);
    CHECK(max_abs(tb.topRows(n - last)) < 1e-10 * scale);
    CHECK(max_abs(tb.bottomRows(last) - nf.B_blocks.back()) < 1e-10 * scale);
    for (Index j = 0; j + 1 < nf.blocks(); ++j) {
      CHECK(qr_rank(nf.B_blocks[static_cast<size_t>(j)]) == nf.block_size(j));
    }

    for (Index j = 1; j < nf.blocks(); ++j) {
      CHECK(max_abs(g.sys.C * nf.transform.block(j).transpose()) < 1e-10 * scale);
    }
    CHECK(max_abs(nf.C_xi * nf.transform.block(0) - g.sys.C) < 1e-10 * scale);
    for (Index j = 0; j < nf.blocks(); ++j) {
      CHECK(max_abs(nf.R_blocks[static_cast<size_t>(j)] -
                    nf.transform.block(j) * g.sys.R) < 1e-12 * scale);
    }

    // The block subspaces are fixed by (A, B): T and the generator's
    // coordinates differ by an orthogonal change inside each block.
    const Mat w = nf.T() * g.Q.transpose();
    for (Index j = 0; j < nf.blocks(); ++j) {
      for (Index i = 0; i < nf.blocks(); ++i) {
        const Mat blk = w.block(nf.block_offset(j), nf.block_offset(i),
                                nf.block_size(j), nf.block_size(i));
        if (i == j) {
          CHECK(max_abs(blk * blk.transpose() - Mat::Identity(blk.rows(), blk.rows())) < 1e-8);
        } else {
          CHECK(max_abs(blk) < 1e-8);
        }
      }
    }
  }
}

TEST_CASE("D blocks match the lower triangle") {
  Rng rng(303);
  const GeneratedSystem g = generate_normal_form_system({{1, 2, 2}, 2, 1, 1}, rng);
  const NormalForm nf = normal_form(g.sys);
  const Mat f = nf.T() * g.sys.A * nf.T().transpose();
  for (Index j = 0; j < nf.blocks(); ++j) {
    REQUIRE(nf.D[static_cast<size_t>(j)].size() == static_cast<size_t>(j));
    for (Index k = 0; k < j; ++k) {
      const Mat blk = f.block(nf.block_offset(j), nf.block_offset(k),
                              nf.block_size(j), nf.block_size(k));
      CHECK(max_abs(blk - nf.D[static_cast<size_t>(j)][static_cast<size_t>(k)]) < 1e-12);
    }
  }
}
