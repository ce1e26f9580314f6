#ifndef JBD_MODULI_HPP
#define JBD_MODULI_HPP

#include <utility>
#include <vector>

#include "jbd/matrix_set.hpp"
#include "jbd/partition.hpp"

namespace jbd {

/// The diagonal blocks of a block-diagonalized set: entry (i, j) is the
/// j-th diagonal block of W^T A_i W, of order n_j.
struct DiagonalizedSet {
  Partition tau;
  std::vector<std::vector<Matrix>> blocks;  // [i][j]

  DiagonalizedSet(Partition tau_, std::vector<std::vector<Matrix>> blocks_);

  int m() const { return static_cast<int>(blocks.size()); }

  /// Extracts bdiag(W^T A_i W) blockwise. The off-diagonal part is ignored,
  /// which makes this usable both for exact diagonalizations and for the
  /// estimated variant built from a noisy set.
  static DiagonalizedSet from_congruence(const MatrixSet& a, const Matrix& w,
                                         const Partition& tau);
};

struct ModuliReport {
  double omega_uniq = 0.0;
  double omega_robu = 0.0;     // +infinity when tau = (1,...,1)
  double omega_robu_alt = 0.0; // via restriction to the complement of vec(I)
  std::vector<double> per_pair_sigmas;         // sigma_min(G_jk), j<k row-major
  std::vector<double> per_block_second_sigmas; // 2nd-smallest sigma of G_jj, n_j>1
  bool nondivisible_certified = false;
};

/// The stacked Kronecker system whose kernel carries the off-diagonal
/// coupling between blocks j and k; 2m*n_j*n_k rows by 2*n_j*n_k columns.
Matrix build_gjk(const DiagonalizedSet& ds, int j, int k);

/// Gram matrix of build_gjk assembled directly from its sum-of-Kronecker
/// expression; symmetric of order 2*n_j*n_k.
Matrix build_mjk(const DiagonalizedSet& ds, int j, int k);

/// The within-block system; m*n_j^2 rows by n_j^2 columns. vec(I_{n_j})
/// always lies in its kernel.
Matrix build_gjj(const DiagonalizedSet& ds, int j);

/// Moduli of uniqueness and non-divisibility. omega_uniq is the smallest
/// sigma_min(G_jk) over pairs; omega_robu the smallest above-threshold
/// singular value of the G_jj (infinity for the all-ones partition).
/// nondivisible_certified is true iff every block with n_j > 1 has its
/// second-smallest singular value above the rank threshold. Never fails on
/// divisible inputs; degenerate data simply yields zero moduli and an
/// uncertified report.
ModuliReport compute_moduli(const DiagonalizedSet& ds);

}  // namespace jbd

#endif
