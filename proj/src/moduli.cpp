#include "jbd/moduli.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/SVD>

#include "jbd/kron.hpp"

namespace jbd {

DiagonalizedSet::DiagonalizedSet(Partition tau_,
                                 std::vector<std::vector<Matrix>> blocks_)
    : tau(std::move(tau_)), blocks(std::move(blocks_)) {
  if (blocks.empty())
    throw std::invalid_argument("DiagonalizedSet: need at least one matrix");
  for (const auto& row : blocks) {
    if (static_cast<int>(row.size()) != tau.t())
      throw std::invalid_argument("DiagonalizedSet: wrong number of blocks");
    for (int j = 0; j < tau.t(); ++j)
      if (row[j].rows() != tau.size(j) || row[j].cols() != tau.size(j))
        throw std::invalid_argument("DiagonalizedSet: block order mismatch");
  }
}

DiagonalizedSet DiagonalizedSet::from_congruence(const MatrixSet& a,
                                                 const Matrix& w,
                                                 const Partition& tau) {
  std::vector<std::vector<Matrix>> blocks;
  blocks.reserve(a.size());
  for (const auto& ai : a) {
    const Matrix s = w.transpose() * ai * w;
    std::vector<Matrix> row;
    row.reserve(tau.t());
    for (int j = 0; j < tau.t(); ++j) row.emplace_back(tau.block(s, j, j));
    blocks.push_back(std::move(row));
  }
  return DiagonalizedSet(tau, std::move(blocks));
}

static void check_pair(const DiagonalizedSet& ds, int j, int k) {
  if (j < 0 || k < 0 || j >= ds.tau.t() || k >= ds.tau.t() || j >= k)
    throw std::out_of_range("moduli: block pair indices out of range");
}

Matrix build_gjk(const DiagonalizedSet& ds, int j, int k) {
  check_pair(ds, j, k);
  const int nj = ds.tau.size(j), nk = ds.tau.size(k);
  const int cols = 2 * nj * nk;
  Matrix g(2 * ds.m() * nj * nk, cols);
  const Matrix ij = Matrix::Identity(nj, nj);
  const Matrix ik = Matrix::Identity(nk, nk);
  for (int i = 0; i < ds.m(); ++i) {
    const Matrix& ajj = ds.blocks[i][j];
    const Matrix& akk = ds.blocks[i][k];
    const int r0 = 2 * i * nj * nk;
    g.block(r0, 0, nj * nk, nj * nk) = kron(ik, ajj);
    g.block(r0, nj * nk, nj * nk, nj * nk) = kron(akk.transpose(), ij);
    g.block(r0 + nj * nk, 0, nj * nk, nj * nk) = kron(ik, ajj.transpose());
    g.block(r0 + nj * nk, nj * nk, nj * nk, nj * nk) = kron(akk, ij);
  }
  return g;
}

Matrix build_mjk(const DiagonalizedSet& ds, int j, int k) {
  check_pair(ds, j, k);
  const int nj = ds.tau.size(j), nk = ds.tau.size(k);
  const Matrix ij = Matrix::Identity(nj, nj);
  const Matrix ik = Matrix::Identity(nk, nk);
  Matrix m = Matrix::Zero(2 * nj * nk, 2 * nj * nk);
  for (int i = 0; i < ds.m(); ++i) {
    const Matrix& a = ds.blocks[i][j];
    const Matrix& b = ds.blocks[i][k];
    const Matrix cross =
        kron(b, a) + kron(b.transpose(), a.transpose());
    m.topLeftCorner(nj * nk, nj * nk) +=
        kron(ik, a.transpose() * a + a * a.transpose());
    m.topRightCorner(nj * nk, nj * nk) += cross;
    m.bottomLeftCorner(nj * nk, nj * nk) += cross;
    m.bottomRightCorner(nj * nk, nj * nk) +=
        kron(b.transpose() * b + b * b.transpose(), ij);
  }
  return m;
}

Matrix build_gjj(const DiagonalizedSet& ds, int j) {
  if (j < 0 || j >= ds.tau.t())
    throw std::out_of_range("build_gjj: block index out of range");
  const int nj = ds.tau.size(j);
  const ShufflePermutation pi(nj);
  const Matrix ij = Matrix::Identity(nj, nj);
  Matrix g(ds.m() * nj * nj, nj * nj);
  for (int i = 0; i < ds.m(); ++i) {
    const Matrix& a = ds.blocks[i][j];
    g.middleRows(i * nj * nj, nj * nj) =
        kron(ij, a) - pi.apply_right(kron(a.transpose(), ij));
  }
  return g;
}

namespace {

Vector singular_values(const Matrix& g) {
  return Eigen::JacobiSVD<Matrix>(g).singularValues();
}

// Singular values below this are treated as zero in the rank decision.
double rank_threshold(const Matrix& g, double sigma_max) {
  const double u = std::numeric_limits<double>::epsilon() / 2;  // unit roundoff
  return static_cast<double>(std::max(g.rows(), g.cols())) * sigma_max * u * 64;
}

// Smallest singular value of G restricted to the orthogonal complement of
// vec(I); only meaningful when vec(I) spans the whole kernel.
double complement_route_sigma(const Matrix& g, int nj) {
  const Eigen::Index d = static_cast<Eigen::Index>(nj) * nj;
  Matrix basis = Matrix::Identity(d, d);
  Vector v = Vector::Zero(d);
  for (int i = 0; i < nj; ++i) v(i + i * static_cast<Eigen::Index>(nj)) = 1.0;
  v.normalize();
  // Householder reflector mapping e_1 to v; columns 2..d span v-perp.
  Vector u = v;
  u(0) -= 1.0;
  const double un = u.norm();
  Matrix q;
  if (un < 1e-14) {
    q = basis;
  } else {
    u /= un;
    q = basis - 2.0 * u * u.transpose();
  }
  const Matrix restricted = g * q.rightCols(d - 1);
  const Vector sv = singular_values(restricted);
  return sv(sv.size() - 1);
}

}  // namespace

ModuliReport compute_moduli(const DiagonalizedSet& ds) {
  const Partition& tau = ds.tau;
  ModuliReport rep;
  const double inf = std::numeric_limits<double>::infinity();

  rep.omega_uniq = inf;
  for (int j = 0; j < tau.t(); ++j)
    for (int k = j + 1; k < tau.t(); ++k) {
      const Vector sv = singular_values(build_gjk(ds, j, k));
      const double smin = sv(sv.size() - 1);
      rep.per_pair_sigmas.push_back(smin);
      rep.omega_uniq = std::min(rep.omega_uniq, smin);
    }
  if (tau.t() < 2) rep.omega_uniq = 0.0;

  if (tau.all_ones()) {
    rep.omega_robu = inf;
    rep.omega_robu_alt = inf;
    rep.nondivisible_certified = true;
  } else {
    rep.omega_robu = inf;
    rep.omega_robu_alt = inf;
    rep.nondivisible_certified = true;
    for (int j = 0; j < tau.t(); ++j) {
      if (tau.size(j) == 1) continue;
      const Matrix g = build_gjj(ds, j);
      const Vector sv = singular_values(g);  // descending
      const double thresh = rank_threshold(g, sv(0));
      // smallest singular value above the rank threshold
      double smallest_nonzero = 0.0;
      for (Eigen::Index i = sv.size() - 1; i >= 0; --i)
        if (sv(i) > thresh) {
          smallest_nonzero = sv(i);
          break;
        }
      rep.omega_robu = std::min(rep.omega_robu, smallest_nonzero);
      const double second_smallest = sv(sv.size() - 2);
      rep.per_block_second_sigmas.push_back(second_smallest);
      if (!(second_smallest > thresh)) rep.nondivisible_certified = false;
      rep.omega_robu_alt =
          std::min(rep.omega_robu_alt, complement_route_sigma(g, tau.size(j)));
    }
  }

  // An all-zero set certifies nothing (its G_jk already gave omega_uniq = 0).
  bool all_zero = true;
  for (const auto& row : ds.blocks)
    for (const auto& b : row)
      if (b.squaredNorm() > 0.0) all_zero = false;
  if (all_zero) rep.nondivisible_certified = false;
  return rep;
}

}  // namespace jbd
