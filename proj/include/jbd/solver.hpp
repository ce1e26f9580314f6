#ifndef JBD_SOLVER_HPP
#define JBD_SOLVER_HPP

#include <cstdint>
#include <optional>

#include "jbd/matrix_set.hpp"
#include "jbd/partition.hpp"

namespace jbd {

struct SolverConfig {
  int max_iters = 500;
  double grad_tol = 1e-11;       // converged when ||grad|| <= grad_tol * (1 + |f|)
  double objective_tol = 1e-24;  // converged when f <= objective_tol * ||A||_F^2
  int restarts = 5;
  std::uint64_t seed = 0;
  std::optional<Matrix> warm_start;  // skips random initialization when set
};

struct SolverOutcome {
  Matrix w_tilde;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// f(W) = sum_i ||offbdiag(W^T A_i W)||_F^2; zero iff W block diagonalizes
/// every A_i.
double objective(const Matrix& w, const MatrixSet& a, const Partition& tau);

/// Euclidean gradient of the objective,
/// grad f(W) = 2 sum_i (A_i W O_i^T + A_i^T W O_i), O_i = offbdiag(W^T A_i W).
Matrix objective_gradient(const Matrix& w, const MatrixSet& a,
                          const Partition& tau);

/// Approximate block diagonalizer via Polak-Ribiere nonlinear CG with
/// backtracking Armijo line search. Iterates are renormalized into the
/// feasible set every step (polar retraction per column group); descent
/// directions use the gradient projected on the feasible set's tangent
/// space. Best outcome over cfg.restarts random initializations is
/// returned (one run only when warm_start is set).
SolverOutcome solve(const MatrixSet& a_tilde, const Partition& tau,
                    const SolverConfig& cfg);

}  // namespace jbd

#endif
