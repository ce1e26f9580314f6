#ifndef JBD_PARTITION_HPP
#define JBD_PARTITION_HPP

#include <cstdint>
#include <vector>

#include "jbd/matrix_set.hpp"

namespace jbd {

class Rng;

/// A partition (n_1,...,n_t) of n. Fixes the block structure used by every
/// operation in this library; immutable after construction.
class Partition {
 public:
  explicit Partition(std::vector<int> sizes);

  int n() const { return n_; }
  int t() const { return static_cast<int>(sizes_.size()); }
  int size(int j) const { return sizes_[j]; }
  int offset(int j) const { return offsets_[j]; }
  const std::vector<int>& sizes() const { return sizes_; }

  bool all_ones() const;
  bool operator==(const Partition& other) const { return sizes_ == other.sizes_; }

  /// Block (j,k) of A as an n_j-by-n_k view.
  Eigen::Block<const Matrix> block(const Matrix& a, int j, int k) const;
  Eigen::Block<Matrix> block(Matrix& a, int j, int k) const;

 private:
  std::vector<int> sizes_;
  std::vector<int> offsets_;
  int n_ = 0;
};

/// Block-diagonal-preserving permutation in factored form: a permutation
/// pi of the block indices with size(j) == size(pi(j)), plus one inner
/// permutation per block. Expansion places inner[j] at block (pi(j), j).
struct BlockPermutation {
  std::vector<int> blockmap;                // pi, 0-based
  std::vector<std::vector<int>> inner;      // inner[j] permutes {0,...,n_j-1}

  static BlockPermutation identity(const Partition& tau);
  static BlockPermutation random(const Partition& tau, Rng& rng);

  /// Dense n-by-n permutation matrix.
  Matrix expand(const Partition& tau) const;

  /// Throws if the factored form violates the size-class constraint.
  void validate(const Partition& tau) const;
};

/// Block-diagonal matrix with one orthogonal block per partition entry.
struct BlockOrthogonal {
  std::vector<Matrix> blocks;

  static BlockOrthogonal identity(const Partition& tau);
  static BlockOrthogonal random(const Partition& tau, Rng& rng);

  Matrix expand(const Partition& tau) const;

  /// Throws unless every block is orthogonal to 1e-12 * n_j (Frobenius).
  void validate(const Partition& tau) const;
};

/// Block diagonal part: off-diagonal blocks zeroed.
Matrix bdiag(const Matrix& a, const Partition& tau);

/// Off-block-diagonal part, a - bdiag(a).
Matrix offbdiag(const Matrix& a, const Partition& tau);

/// Projects a nonsingular W onto the set of normalized diagonalizers:
/// W' = W [bdiag(W^T W)]^{-1/2}, computed per block via symmetric
/// eigendecomposition. Column span of each block group is preserved.
/// Throws on (near-)singular input.
Matrix normalize_to_w(const Matrix& w, const Partition& tau);

/// True iff W is nonsingular and ||bdiag(W^T W) - I||_F <= tol.
/// Returns false (never throws) on singular input.
bool is_member_w(const Matrix& w, const Partition& tau, double tol = 1e-10);

/// W * D * Pi with D and Pi expanded. Membership in the normalized set is
/// preserved when D is orthogonal.
Matrix apply_equivalence(const Matrix& w, const Partition& tau,
                         const BlockOrthogonal& d, const BlockPermutation& p);

}  // namespace jbd

#endif
