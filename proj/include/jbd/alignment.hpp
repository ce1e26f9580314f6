#ifndef JBD_ALIGNMENT_HPP
#define JBD_ALIGNMENT_HPP

#include <vector>

#include "jbd/matrix_set.hpp"
#include "jbd/partition.hpp"

namespace jbd {

/// Outcome of the equivalence-class distance computation:
/// error = ||W - W~ D Pi||_F / ||W~||_F at the returned factors.
struct AlignmentResult {
  double error = 0.0;
  BlockOrthogonal d;
  BlockPermutation p;
  std::vector<int> pi_assignment;  // optimal block map, 0-based
};

/// Minimizes ||W - W~ D Pi||_F / ||W~||_F over orthogonal block-diagonal D
/// and block-preserving permutations Pi. The block map is found by exhaustive
/// search within size classes scored by nuclear norms of W_j^T W~_{pi(j)};
/// per-block factors come from the Procrustes SVD. Ties in the score pick
/// the lexicographically smallest pi. Both inputs must pass is_member_w.
AlignmentResult align(const Matrix& w, const Matrix& w_tilde,
                      const Partition& tau);

}  // namespace jbd

#endif
