#include "gammastab/generators.hpp"

#include <algorithm>

namespace gammastab {

Mat gaussian(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Mat m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = dist(rng);
  }
  return m;
}

Mat random_orthogonal(Index n, Rng& rng) {
  const Mat g = gaussian(n, n, rng);
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ() * Mat::Identity(n, n);
  const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < n; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

Mat random_full_rank(Index rows, Index cols, Rng& rng, double floor) {
  for (;;) {
    Mat m = gaussian(rows, cols, rng);
    if (rows == 0 || cols == 0) return m;
    const Eigen::JacobiSVD<Mat> svd(m);
    const Vec& s = svd.singularValues();
    if (s(s.size() - 1) >= floor) return m;
  }
}

Mat random_hurwitz(Index n, Rng& rng, double margin) {
  Mat a = gaussian(n, n, rng);
  const double shift = spectral_abscissa(a) + margin;
  a.diagonal().array() -= shift;
  return a;
}

void random_controllable_pair(Index n, Index m, Rng& rng, Mat& a, Mat& b) {
  do {
    a = gaussian(n, n, rng);
    b = gaussian(n, m, rng);
  } while (!pbh_controllable(a, b));
}

NormalFormRecipe random_recipe(Rng& rng, Index max_l, Index max_block,
                               bool square_input) {
  std::uniform_int_distribution<Index> pick_l(0, max_l);
  std::uniform_int_distribution<Index> pick_size(1, max_block);
  NormalFormRecipe r;
  const Index l = pick_l(rng);
  for (Index j = 0; j <= l; ++j) r.block_sizes.push_back(pick_size(rng));
  std::sort(r.block_sizes.begin(), r.block_sizes.end());
  const Index last = r.block_sizes.back();
  if (square_input) {
    r.m = last;
  } else {
    std::uniform_int_distribution<Index> pick_m(last, max_block);
    r.m = pick_m(rng);
  }
  r.p = pick_size(rng);
  r.ell = pick_size(rng);
  return r;
}

GeneratedSystem generate_normal_form_system(const NormalFormRecipe& recipe, Rng& rng) {
  const auto& d = recipe.block_sizes;
  if (d.empty()) throw Error(ErrorKind::kInvalidInput, "recipe has no blocks");
  for (size_t j = 0; j < d.size(); ++j) {
    if (d[j] < 1 || (j + 1 < d.size() && d[j] > d[j + 1])) {
      throw Error(ErrorKind::kInvalidInput, "block sizes must be positive and nondecreasing");
    }
  }
  if (recipe.m < d.back() || recipe.p < 1 || recipe.ell < 0) {
    throw Error(ErrorKind::kInvalidInput, "recipe input/output sizes are inconsistent");
  }
  const auto blocks = static_cast<Index>(d.size());
  std::vector<Index> off(d.size() + 1, 0);
  for (size_t j = 0; j < d.size(); ++j) off[j + 1] = off[j] + d[j];
  const Index n = off.back();

  for (;;) {
    Mat a = Mat::Zero(n, n);
    Mat b = Mat::Zero(n, recipe.m);
    for (Index j = 0; j < blocks; ++j) {
      const auto uj = static_cast<size_t>(j);
      for (Index k = 0; k <= j; ++k) {
        const auto uk = static_cast<size_t>(k);
        a.block(off[uj], off[uk], d[uj], d[uk]) = gaussian(d[uj], d[uk], rng);
      }
      if (j + 1 < blocks) {
        a.block(off[uj], off[uj + 1], d[uj], d[uj + 1]) = random_full_rank(d[uj], d[uj + 1], rng);
      }
    }
    b.bottomRows(d.back()) = random_full_rank(d.back(), recipe.m, rng);
    Mat c = Mat::Zero(recipe.p, n);
    c.leftCols(d.front()) = gaussian(recipe.p, d.front(), rng);
    if (c.norm() < 1e-3) continue;
    const Mat r = gaussian(n, recipe.ell, rng);

    const Mat q = random_orthogonal(n, rng);
    GeneratedSystem g;
    g.sys.A = q.transpose() * a * q;
    g.sys.B = q.transpose() * b;
    g.sys.C = c * q;
    g.sys.R = q.transpose() * r;
    g.Q = q;
    g.l = blocks - 1;
    g.block_sizes = d;
    if (recipe.detectable && !pbh_detectable(g.sys.A, g.sys.C)) continue;
    return g;
  }
}

}  // namespace gammastab
