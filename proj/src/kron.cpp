#include "jbd/kron.hpp"

#include <stdexcept>

namespace jbd {

Vector vec(const Matrix& x) {
  return Eigen::Map<const Vector>(x.data(), x.size());
}

Matrix unvec(const Vector& x, Eigen::Index p, Eigen::Index q) {
  if (x.size() != p * q) throw std::invalid_argument("unvec: size mismatch");
  return Eigen::Map<const Matrix>(x.data(), p, q);
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

ShufflePermutation::ShufflePermutation(int n) : n_(n) {
  if (n < 1) throw std::invalid_argument("perfect_shuffle: order must be >= 1");
}

Vector ShufflePermutation::apply(const Vector& y) const {
  if (y.size() != dim()) throw std::invalid_argument("shuffle: size mismatch");
  Vector out(dim());
  for (Eigen::Index r = 0; r < dim(); ++r) out(r) = y(map(r));
  return out;
}

Matrix ShufflePermutation::apply_right(const Matrix& m) const {
  if (m.cols() != dim()) throw std::invalid_argument("shuffle: size mismatch");
  Matrix out(m.rows(), dim());
  // M P: column c of P has its 1 in row map(c) (P is an involution),
  // so (M P)_{:,c} = M_{:,map(c)}.
  for (Eigen::Index c = 0; c < dim(); ++c) out.col(c) = m.col(map(c));
  return out;
}

Matrix ShufflePermutation::dense() const {
  Matrix out = Matrix::Zero(dim(), dim());
  for (Eigen::Index r = 0; r < dim(); ++r) out(r, map(r)) = 1.0;
  return out;
}

}  // namespace jbd
