#ifndef JBD_INSTANCE_HPP
#define JBD_INSTANCE_HPP

#include <cstdint>
#include <string>

#include "jbd/matrix_set.hpp"
#include "jbd/partition.hpp"

namespace jbd {

/// One randomized test instance: a clean block-diagonalizable set, its
/// noisy perturbation, the generating diagonalizer, and the recipe inputs.
struct InstanceBundle {
  Partition tau;
  MatrixSet a_clean;
  MatrixSet a_noisy;
  Matrix w_true;
  double xi = 0.0;
  std::uint64_t seed = 0;
};

/// Draws W column-group-orthonormalized from standard normals, sets
/// V = W^{-T}, A_i = V D_i V^T with dense standard-normal diagonal blocks
/// D_i, and A~_i = A_i + xi N_i. Deterministic in seed; near-singular W
/// draws (sigma_min < 1e-8) are rejected and retried a bounded number of
/// times. Sub-streams: 0 for W (retry a re-keys to 2^32+a), 1+i for D_i,
/// 1+m+i for N_i.
InstanceBundle generate(const Partition& tau, int m, double xi,
                        std::uint64_t seed);

/// Versioned JSON envelope with matrices as row-major arrays of hex-float
/// strings; round trips are bit exact. Malformed or version-mismatched
/// files raise std::runtime_error with a diagnostic.
void save_instance(const InstanceBundle& bundle, const std::string& path);
InstanceBundle load_instance(const std::string& path);

/// Same envelope for a single matrix (solver outputs, warm starts).
void save_matrix(const Matrix& w, const std::string& path);
Matrix load_matrix(const std::string& path);

/// FNV-1a over the file bytes, as a fixed-width hex string; used by report
/// emitters to reference the instance they analyzed.
std::string file_content_hash(const std::string& path);

}  // namespace jbd

#endif
