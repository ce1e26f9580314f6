#include "jbd/alignment.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include <Eigen/SVD>

namespace jbd {

namespace {

constexpr int kExhaustiveClassLimit = 8;

// Exact min-cost perfect assignment (Hungarian algorithm with potentials),
// O(n^3). Returns row -> column.
std::vector<int> hungarian_min(const Matrix& cost) {
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = 0;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

// Lexicographically smallest maximizer over permutations of one size class,
// by depth-first enumeration in ascending candidate order with strict
// improvement.
void exhaustive_class_map(const std::vector<int>& members, const Matrix& score,
                          std::vector<int>& pi) {
  const int c = static_cast<int>(members.size());
  std::vector<int> current(c, -1), best;
  std::vector<char> used(c, 0);
  double best_total = -std::numeric_limits<double>::infinity();
  std::function<void(int, double)> rec = [&](int pos, double total) {
    if (pos == c) {
      if (total > best_total) {
        best_total = total;
        best = current;
      }
      return;
    }
    for (int cand = 0; cand < c; ++cand) {
      if (used[cand]) continue;
      used[cand] = 1;
      current[pos] = cand;
      rec(pos + 1, total + score(members[pos], members[cand]));
      used[cand] = 0;
    }
  };
  rec(0, 0.0);
  for (int pos = 0; pos < c; ++pos) pi[members[pos]] = members[best[pos]];
}

// Block map maximizing the summed score subject to size(j) == size(pi(j)).
// Small size classes are enumerated exhaustively (which also pins the
// lexicographic tie-break); larger ones go through the assignment solver.
std::vector<int> best_block_map(const Partition& tau, const Matrix& score) {
  std::map<int, std::vector<int>> classes;
  for (int j = 0; j < tau.t(); ++j) classes[tau.size(j)].push_back(j);

  std::vector<int> pi(tau.t(), -1);
  for (const auto& [size, members] : classes) {
    if (static_cast<int>(members.size()) <= kExhaustiveClassLimit) {
      exhaustive_class_map(members, score, pi);
    } else {
      const int c = static_cast<int>(members.size());
      Matrix cost(c, c);
      for (int a = 0; a < c; ++a)
        for (int b = 0; b < c; ++b) cost(a, b) = -score(members[a], members[b]);
      const std::vector<int> assignment = hungarian_min(cost);
      for (int a = 0; a < c; ++a) pi[members[a]] = members[assignment[a]];
    }
  }
  return pi;
}

}  // namespace

AlignmentResult align(const Matrix& w, const Matrix& w_tilde,
                      const Partition& tau) {
  if (!is_member_w(w, tau) || !is_member_w(w_tilde, tau))
    throw std::invalid_argument("align: inputs must be normalized diagonalizers");

  const int t = tau.t();

  // Nuclear-norm scores for all same-size block pairs.
  Matrix score = Matrix::Zero(t, t);
  for (int j = 0; j < t; ++j)
    for (int k = 0; k < t; ++k) {
      if (tau.size(j) != tau.size(k)) continue;
      const Matrix cross =
          w.middleCols(tau.offset(j), tau.size(j)).transpose() *
          w_tilde.middleCols(tau.offset(k), tau.size(k));
      score(j, k) = Eigen::JacobiSVD<Matrix>(cross).singularValues().sum();
    }

  AlignmentResult out;
  out.pi_assignment = best_block_map(tau, score);

  // Per-block Procrustes factor: with M = W_j^T W~_{pi(j)} = U S V^T, the
  // orthogonal factor maximizing trace(M O) is O = V U^T.
  out.d.blocks.assign(t, Matrix());
  out.p = BlockPermutation::identity(tau);
  out.p.blockmap = out.pi_assignment;
  for (int j = 0; j < t; ++j) {
    const int k = out.pi_assignment[j];
    const Matrix cross =
        w.middleCols(tau.offset(j), tau.size(j)).transpose() *
        w_tilde.middleCols(tau.offset(k), tau.size(k));
    Eigen::JacobiSVD<Matrix> svd(cross,
                                 Eigen::ComputeFullU | Eigen::ComputeFullV);
    // Pi places this factor so that column group j of W~ D Pi equals
    // W~_{pi(j)} D_{pi(j)}.
    out.d.blocks[k] = svd.matrixV() * svd.matrixU().transpose();
  }

  out.error = (w - apply_equivalence(w_tilde, tau, out.d, out.p)).norm() /
              w_tilde.norm();
  return out;
}

}  // namespace jbd
