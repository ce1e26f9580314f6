#ifndef JBD_PERTURBATION_HPP
#define JBD_PERTURBATION_HPP

#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "jbd/matrix_set.hpp"
#include "jbd/moduli.hpp"
#include "jbd/partition.hpp"

namespace jbd {

/// t distinct values gamma_j with |gamma_j| <= 1 and their minimum gap g.
/// Expanded, Gamma = diag(gamma_1 I_{n_1}, ..., gamma_t I_{n_t}).
struct GammaSpec {
  std::vector<double> gammas;
  double g = 0.0;

  static GammaSpec from_values(std::vector<double> values);
  Matrix expand(const Partition& tau) const;
};

/// Equally spaced gamma_j = -1 + 2(j-1)/(t-1) on [-1, 1]; g = 2/(t-1).
/// Requires t >= 2.
GammaSpec default_gamma(const Partition& tau);

/// Commutator-style residuals R_i = S_i Gamma - Gamma S_i with
/// S_i = W^T A_i W. Their block diagonal part vanishes identically;
/// they vanish entirely iff W block diagonalizes every A_i.
struct Residuals {
  MatrixSet r;
  double r_tilde = 0.0;  // (sum_i ||R_i||_F^2)^{1/2}
};

Residuals residuals(const MatrixSet& a_tilde, const Matrix& w_tilde,
                    const GammaSpec& gamma, const Partition& tau);

/// Backward perturbation making w_tilde an exact diagonalizer of
/// {A_i + E_i}, plus the certified bound eps_berr >= ||E||_F / ||A||_F.
struct BackwardError {
  double eps_berr = 0.0;
  MatrixSet e;
};

BackwardError backward_error(const MatrixSet& a_tilde, const Matrix& w_tilde,
                             const GammaSpec& gamma, const Partition& tau);

/// The a-priori bound. eps_ub is NaN whenever condition_holds is false.
struct BoundResult {
  double delta = 0.0;
  double eps_star = 0.0;
  double ratio = 0.0;          // delta over the admissibility threshold
  bool condition_holds = false;
  double eps_ub = std::numeric_limits<double>::quiet_NaN();
  double kappa_q = 0.0;
  double q_inv_norm = 0.0;
  double tau_const = 0.0;
  double alpha_const = 0.0;
};

/// Structure constants tau = (sqrt(2)-1)/sqrt(t-1), alpha = 2 tau/(sqrt(2)+tau)^2.
std::pair<double, double> bound_constants(int t);

/// The bound as a function of eps_star alone:
/// (1 + sqrt(t) e)/sqrt(1 - 2 sqrt(t-1) e - (t-1) e^2) - 1.
double eps_ub_from_eps_star(double eps_star, int t);

/// Evaluates the bound for a given reference diagonalizer W and perturbation
/// size delta_A. Q = W^{-1} W_tilde is obtained by linear solve; kappa_2(Q)
/// and ||Q^{-1}||_2 come from its full SVD. Admissibility requires
/// delta < min{alpha g omega_uniq / kappa_2(Q), (1-2 alpha) g omega_robu / sqrt(2)},
/// with the second term dropped when omega_robu is infinite.
BoundResult error_bound(const Matrix& w, const Matrix& w_tilde,
                          double r_tilde, double delta_a,
                          const GammaSpec& gamma, const Partition& tau,
                          double omega_uniq, double omega_robu);

/// Scalar-scaling-invariant condition number
/// (tau/alpha) (sqrt(t)+sqrt(t-1)) ||W||_2^2 ||A||_F / omega_uniq;
/// +infinity when omega_uniq = 0.
double condition_number(const MatrixSet& a, const Matrix& w,
                        const Partition& tau, double omega_uniq);

/// Everything the Gamma search needs that does not depend on Gamma.
struct BoundContext {
  Matrix w;          // reference diagonalizer (the truth, or w_tilde itself)
  double delta_a = 0.0;
  double omega_uniq = 0.0;
  double omega_robu = 0.0;
};

/// Field-use context: no truth available. Takes W := w_tilde (so Q = I),
/// delta_A := 0, and estimates the moduli from bdiag(W~^T A~_i W~).
BoundContext estimated_context(const MatrixSet& a_tilde, const Matrix& w_tilde,
                               const Partition& tau);

/// One fully evaluated Gamma candidate.
struct GammaEvaluation {
  GammaSpec gamma;
  double r_tilde = 0.0;
  double eps_berr = 0.0;
  BoundResult bound;
};

/// Evaluates the default Gamma plus n_random uniform draws from (-1, 1)
/// (redrawing candidates whose gap falls below 1e-3) and returns the one
/// minimizing eps_ub among those whose admissibility condition holds,
/// falling back to the smallest ratio when none does. Deterministic in seed.
GammaEvaluation select_gamma(const MatrixSet& a_tilde, const Matrix& w_tilde,
                             const Partition& tau, const BoundContext& ctx,
                             int n_random, std::uint64_t seed);

/// Estimated-variant overload: builds the context from (a_tilde, w_tilde).
GammaEvaluation select_gamma(const MatrixSet& a_tilde, const Matrix& w_tilde,
                             const Partition& tau, int n_random,
                             std::uint64_t seed);

/// All derived quantities for one instance.
struct AnalysisReport {
  // moduli of the clean problem (oracle) and the selected Gamma
  double omega_uniq = 0.0;
  double omega_robu = 0.0;
  bool nondivisible_certified = false;
  std::vector<double> gammas;
  double g = 0.0;

  double r_tilde = 0.0;
  double delta_a = 0.0;
  double delta = 0.0;
  double tau_const = 0.0;
  double alpha_const = 0.0;
  double eps_star = 0.0;
  double ratio = 0.0;
  bool condition_holds = false;
  double eps_ub = std::numeric_limits<double>::quiet_NaN();
  double eps_berr = 0.0;
  double cond_a = 0.0;
  double kappa_q = 0.0;

  // norms
  double w_norm2 = 0.0;
  double w_tilde_norm2 = 0.0;
  double q_inv_norm2 = 0.0;
  double a_norm_f = 0.0;

  double align_error = std::numeric_limits<double>::quiet_NaN();

  // field-use estimate (moduli from bdiag(W~^T A~ W~), Q = I, delta_A = 0)
  double est_omega_uniq = 0.0;
  double est_omega_robu = 0.0;
  double est_ratio = 0.0;
  bool est_condition_holds = false;
  double est_eps_ub = std::numeric_limits<double>::quiet_NaN();
  double est_cond_a = 0.0;
};

/// Full oracle pipeline for one instance: moduli of the clean set, Gamma
/// search, backward error, bound, condition number, alignment error, plus
/// the estimated (truth-free) variant alongside.
AnalysisReport analyze(const MatrixSet& a_clean, const MatrixSet& a_noisy,
                       const Matrix& w_true, const Matrix& w_tilde,
                       const Partition& tau, int gamma_samples,
                       std::uint64_t gamma_seed);

}  // namespace jbd

#endif
