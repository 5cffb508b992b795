#pragma once

// Seeded random test-instance generators.

#include <random>
#include <vector>

#include "gammastab/matrix_core.hpp"
#include "gammastab/normal_form.hpp"

namespace gammastab {

using Rng = std::mt19937_64;

/// Standard normal entries.
Mat gaussian(Index rows, Index cols, Rng& rng);

/// Haar-distributed orthogonal matrix (QR of a Gaussian with sign fix).
Mat random_orthogonal(Index n, Rng& rng);

/// Gaussian matrix resampled until its smallest singular value is at least
/// `floor` (rows <= cols gives full row rank).
Mat random_full_rank(Index rows, Index cols, Rng& rng, double floor = 0.1);

/// Spectral abscissa at most -margin.
Mat random_hurwitz(Index n, Rng& rng, double margin = 0.5);

/// Gaussian (A, B) resampled until PBH-controllable.
void random_controllable_pair(Index n, Index m, Rng& rng, Mat& a, Mat& b);

/// Block sizes d_1 <= ... <= d_{l+1}; the last block is driven by an
/// m-input B_{l+1} of full row rank, so d_{l+1} <= m.
struct NormalFormRecipe {
  std::vector<Index> block_sizes;
  Index m = 1;
  Index p = 1;
  Index ell = 1;
  /// Resample until (A, C) is detectable.
  bool detectable = false;
};

struct GeneratedSystem {
  LinearSystem sys;
  /// Orthogonal Q with xi = Q x for the generated coordinates.
  Mat Q;
  Index l = 0;
  std::vector<Index> block_sizes;
};

/// Random recipe with l <= max_l and blocks of size at most max_block.
/// `square_input` makes m equal to the last block size, so B has full
/// column rank.
NormalFormRecipe random_recipe(Rng& rng, Index max_l, Index max_block,
                               bool square_input = false);

/// Builds the block matrices directly (random A_j, full-row-rank B_j,
/// D_{j,k}, C_xi) and conjugates by a random orthogonal matrix.
GeneratedSystem generate_normal_form_system(const NormalFormRecipe& recipe, Rng& rng);

}  // namespace gammastab
