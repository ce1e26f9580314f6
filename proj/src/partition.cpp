#include "jbd/partition.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "jbd/rng.hpp"

namespace jbd {

double set_norm(const MatrixSet& a) {
  double s = 0.0;
  for (const auto& ai : a) s += ai.squaredNorm();
  return std::sqrt(s);
}

double set_distance(const MatrixSet& a, const MatrixSet& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("set_distance: sets have different sizes");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]).squaredNorm();
  return std::sqrt(s);
}

Partition::Partition(std::vector<int> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.empty()) throw std::invalid_argument("Partition: empty size list");
  offsets_.reserve(sizes_.size());
  for (int nj : sizes_) {
    if (nj < 1) throw std::invalid_argument("Partition: sizes must be >= 1");
    offsets_.push_back(n_);
    n_ += nj;
  }
}

bool Partition::all_ones() const {
  return std::all_of(sizes_.begin(), sizes_.end(), [](int s) { return s == 1; });
}

Eigen::Block<const Matrix> Partition::block(const Matrix& a, int j, int k) const {
  return a.block(offset(j), offset(k), size(j), size(k));
}

Eigen::Block<Matrix> Partition::block(Matrix& a, int j, int k) const {
  return a.block(offset(j), offset(k), size(j), size(k));
}

static void check_square(const Matrix& a, const Partition& tau, const char* op) {
  if (a.rows() != tau.n() || a.cols() != tau.n())
    throw std::invalid_argument(std::string(op) + ": matrix is " +
                                std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + ", partition needs " +
                                std::to_string(tau.n()));
}

Matrix bdiag(const Matrix& a, const Partition& tau) {
  check_square(a, tau, "bdiag");
  Matrix out = Matrix::Zero(tau.n(), tau.n());
  for (int j = 0; j < tau.t(); ++j) tau.block(out, j, j) = tau.block(a, j, j);
  return out;
}

Matrix offbdiag(const Matrix& a, const Partition& tau) {
  check_square(a, tau, "offbdiag");
  Matrix out = a;
  for (int j = 0; j < tau.t(); ++j)
    tau.block(out, j, j).setZero();
  return out;
}

// Symmetric inverse square root of a small SPD matrix.
static Matrix inv_sqrt_spd(const Matrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(s);
  const Vector& lam = eig.eigenvalues();
  if (lam.minCoeff() <= 0.0)
    throw std::invalid_argument("normalize_to_w: gram block not positive definite");
  return eig.eigenvectors() * lam.cwiseSqrt().cwiseInverse().asDiagonal() *
         eig.eigenvectors().transpose();
}

Matrix normalize_to_w(const Matrix& w, const Partition& tau) {
  check_square(w, tau, "normalize_to_w");
  Eigen::JacobiSVD<Matrix> svd(w);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(w.cols() - 1);
  if (smin <= 1e-12 * smax)
    throw std::invalid_argument("normalize_to_w: input is singular to working precision");
  Matrix out(tau.n(), tau.n());
  for (int j = 0; j < tau.t(); ++j) {
    const auto wj = w.middleCols(tau.offset(j), tau.size(j));
    out.middleCols(tau.offset(j), tau.size(j)) =
        wj * inv_sqrt_spd(wj.transpose() * wj);
  }
  return out;
}

bool is_member_w(const Matrix& w, const Partition& tau, double tol) {
  if (w.rows() != tau.n() || w.cols() != tau.n()) return false;
  Eigen::JacobiSVD<Matrix> svd(w);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(w.cols() - 1);
  if (smax == 0.0 || smin <= 1e-12 * smax) return false;
  double dev2 = 0.0;
  for (int j = 0; j < tau.t(); ++j) {
    const auto wj = w.middleCols(tau.offset(j), tau.size(j));
    dev2 += (wj.transpose() * wj - Matrix::Identity(tau.size(j), tau.size(j)))
                .squaredNorm();
  }
  return std::sqrt(dev2) <= tol;
}

BlockPermutation BlockPermutation::identity(const Partition& tau) {
  BlockPermutation p;
  p.blockmap.resize(tau.t());
  std::iota(p.blockmap.begin(), p.blockmap.end(), 0);
  p.inner.resize(tau.t());
  for (int j = 0; j < tau.t(); ++j) {
    p.inner[j].resize(tau.size(j));
    std::iota(p.inner[j].begin(), p.inner[j].end(), 0);
  }
  return p;
}

BlockPermutation BlockPermutation::random(const Partition& tau, Rng& rng) {
  BlockPermutation p = identity(tau);
  // Fisher-Yates over block indices, swapping only within a size class.
  for (int j = tau.t() - 1; j > 0; --j) {
    std::vector<int> candidates;
    for (int k = 0; k <= j; ++k)
      if (tau.size(p.blockmap[k]) == tau.size(p.blockmap[j])) candidates.push_back(k);
    const int pick = candidates[static_cast<std::size_t>(
        rng.below(candidates.size()))];
    std::swap(p.blockmap[j], p.blockmap[pick]);
  }
  for (int j = 0; j < tau.t(); ++j)
    for (int i = tau.size(j) - 1; i > 0; --i)
      std::swap(p.inner[j][i],
                p.inner[j][static_cast<std::size_t>(rng.below(i + 1))]);
  return p;
}

void BlockPermutation::validate(const Partition& tau) const {
  if (static_cast<int>(blockmap.size()) != tau.t() ||
      static_cast<int>(inner.size()) != tau.t())
    throw std::invalid_argument("BlockPermutation: wrong cardinality");
  std::vector<bool> seen(tau.t(), false);
  for (int j = 0; j < tau.t(); ++j) {
    const int pj = blockmap[j];
    if (pj < 0 || pj >= tau.t() || seen[pj])
      throw std::invalid_argument("BlockPermutation: blockmap is not a permutation");
    seen[pj] = true;
    if (tau.size(pj) != tau.size(j))
      throw std::invalid_argument("BlockPermutation: size classes not preserved");
    if (static_cast<int>(inner[j].size()) != tau.size(j))
      throw std::invalid_argument("BlockPermutation: inner permutation size mismatch");
  }
}

Matrix BlockPermutation::expand(const Partition& tau) const {
  validate(tau);
  Matrix out = Matrix::Zero(tau.n(), tau.n());
  for (int j = 0; j < tau.t(); ++j) {
    // Block (pi(j), j) carries the inner permutation of block j.
    const int ro = tau.offset(blockmap[j]);
    const int co = tau.offset(j);
    for (int c = 0; c < tau.size(j); ++c) out(ro + inner[j][c], co + c) = 1.0;
  }
  return out;
}

BlockOrthogonal BlockOrthogonal::identity(const Partition& tau) {
  BlockOrthogonal d;
  d.blocks.reserve(tau.t());
  for (int j = 0; j < tau.t(); ++j)
    d.blocks.push_back(Matrix::Identity(tau.size(j), tau.size(j)));
  return d;
}

BlockOrthogonal BlockOrthogonal::random(const Partition& tau, Rng& rng) {
  BlockOrthogonal d;
  d.blocks.reserve(tau.t());
  for (int j = 0; j < tau.t(); ++j) {
    const int nj = tau.size(j);
    Matrix g = rng.normal_matrix(nj, nj);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    // Fix the sign ambiguity so the draw is deterministic and uniform-ish.
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int c = 0; c < nj; ++c)
      if (r(c, c) < 0.0) q.col(c) = -q.col(c);
    d.blocks.push_back(std::move(q));
  }
  return d;
}

void BlockOrthogonal::validate(const Partition& tau) const {
  if (static_cast<int>(blocks.size()) != tau.t())
    throw std::invalid_argument("BlockOrthogonal: wrong cardinality");
  for (int j = 0; j < tau.t(); ++j) {
    const int nj = tau.size(j);
    if (blocks[j].rows() != nj || blocks[j].cols() != nj)
      throw std::invalid_argument("BlockOrthogonal: block size mismatch");
    const double dev =
        (blocks[j].transpose() * blocks[j] - Matrix::Identity(nj, nj)).norm();
    if (dev > 1e-12 * nj)
      throw std::invalid_argument("BlockOrthogonal: block is not orthogonal");
  }
}

Matrix BlockOrthogonal::expand(const Partition& tau) const {
  validate(tau);
  Matrix out = Matrix::Zero(tau.n(), tau.n());
  for (int j = 0; j < tau.t(); ++j) tau.block(out, j, j) = blocks[j];
  return out;
}

Matrix apply_equivalence(const Matrix& w, const Partition& tau,
                         const BlockOrthogonal& d, const BlockPermutation& p) {
  check_square(w, tau, "apply_equivalence");
  return w * d.expand(tau) * p.expand(tau);
}

}  // namespace jbd
