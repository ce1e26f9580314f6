#ifndef JBD_KRON_HPP
#define JBD_KRON_HPP

#include <vector>

#include "jbd/matrix_set.hpp"

namespace jbd {

/// Column-major stacking of X into a pq vector.
Vector vec(const Matrix& x);

/// Inverse of vec: reshape(vec(X), p, q) == X.
Matrix unvec(const Vector& x, Eigen::Index p, Eigen::Index q);

/// Kronecker product; satisfies vec(B X A^T) = (A (x) B) vec(X).
Matrix kron(const Matrix& a, const Matrix& b);

/// Perfect shuffle permutation of order n^2: applied to vec(Z^T) it yields
/// vec(Z). Involutive and orthogonal. Stored as an index map so it can be
/// applied without forming the dense matrix.
class ShufflePermutation {
 public:
  explicit ShufflePermutation(int n);

  int order() const { return n_; }
  Eigen::Index dim() const { return static_cast<Eigen::Index>(n_) * n_; }

  /// (P y)_r = y_{map(r)}.
  Eigen::Index map(Eigen::Index r) const {
    const Eigen::Index i = r % n_, j = r / n_;
    return j + i * n_;
  }

  Vector apply(const Vector& y) const;

  /// Column permutation: returns M * P without forming P.
  Matrix apply_right(const Matrix& m) const;

  Matrix dense() const;

 private:
  int n_;
};

inline ShufflePermutation perfect_shuffle(int n) { return ShufflePermutation(n); }

}  // namespace jbd

#endif
