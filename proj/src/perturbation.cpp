#include "jbd/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "jbd/alignment.hpp"
#include "jbd/rng.hpp"

namespace jbd {

GammaSpec GammaSpec::from_values(std::vector<double> values) {
  if (values.size() < 2)
    throw std::invalid_argument("GammaSpec: need at least two values");
  GammaSpec spec;
  spec.gammas = std::move(values);
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < spec.gammas.size(); ++j) {
    if (std::abs(spec.gammas[j]) > 1.0 + 1e-15)
      throw std::invalid_argument("GammaSpec: |gamma_j| must be <= 1");
    for (std::size_t k = j + 1; k < spec.gammas.size(); ++k)
      gap = std::min(gap, std::abs(spec.gammas[j] - spec.gammas[k]));
  }
  if (!(gap > 0.0))
    throw std::invalid_argument("GammaSpec: values must be distinct");
  spec.g = gap;
  return spec;
}

Matrix GammaSpec::expand(const Partition& tau) const {
  if (static_cast<int>(gammas.size()) != tau.t())
    throw std::invalid_argument("GammaSpec: cardinality mismatch");
  Matrix out = Matrix::Zero(tau.n(), tau.n());
  for (int j = 0; j < tau.t(); ++j)
    tau.block(out, j, j) =
        gammas[j] * Matrix::Identity(tau.size(j), tau.size(j));
  return out;
}

GammaSpec default_gamma(const Partition& tau) {
  const int t = tau.t();
  if (t < 2) throw std::invalid_argument("default_gamma: requires t >= 2");
  std::vector<double> values(t);
  for (int j = 0; j < t; ++j)
    values[j] = -1.0 + 2.0 * j / static_cast<double>(t - 1);
  return GammaSpec::from_values(std::move(values));
}

Residuals residuals(const MatrixSet& a_tilde, const Matrix& w_tilde,
                    const GammaSpec& gamma, const Partition& tau) {
  const Matrix g = gamma.expand(tau);
  Residuals out;
  out.r.reserve(a_tilde.size());
  double sum2 = 0.0;
  for (const auto& ai : a_tilde) {
    if (ai.rows() != tau.n() || ai.cols() != tau.n())
      throw std::invalid_argument("residuals: matrix dimension mismatch");
    const Matrix s = w_tilde.transpose() * ai * w_tilde;
    Matrix r = s * g - g * s;
    sum2 += r.squaredNorm();
    out.r.push_back(std::move(r));
  }
  out.r_tilde = std::sqrt(sum2);
  return out;
}

BackwardError backward_error(const MatrixSet& a_tilde, const Matrix& w_tilde,
                             const GammaSpec& gamma, const Partition& tau) {
  Eigen::JacobiSVD<Matrix> svd(w_tilde);
  const Vector& sv = svd.singularValues();
  if (sv(sv.size() - 1) <= 1e-14 * sv(0))
    throw std::invalid_argument("backward_error: singular diagonalizer");

  const Residuals res = residuals(a_tilde, w_tilde, gamma, tau);
  const Matrix w_inv = Eigen::FullPivLU<Matrix>(w_tilde).inverse();

  BackwardError out;
  out.e.reserve(a_tilde.size());
  for (const auto& ri : res.r) {
    Matrix f = Matrix::Zero(tau.n(), tau.n());
    for (int j = 0; j < tau.t(); ++j)
      for (int k = 0; k < tau.t(); ++k) {
        if (j == k) continue;
        // R^(jk) = (gamma_k - gamma_j) S^(jk); cancelling the off-diagonal
        // block of S needs F^(jk) = R^(jk) / (gamma_j - gamma_k).
        tau.block(f, j, k) =
            tau.block(ri, j, k) / (gamma.gammas[j] - gamma.gammas[k]);
      }
    out.e.push_back(w_inv.transpose() * f * w_inv);
  }
  const double w_inv_norm = 1.0 / sv(sv.size() - 1);
  const double a_norm = set_norm(a_tilde);
  out.eps_berr = a_norm > 0.0
                     ? w_inv_norm * w_inv_norm * res.r_tilde / (gamma.g * a_norm)
                     : 0.0;
  return out;
}

std::pair<double, double> bound_constants(int t) {
  if (t < 2) throw std::invalid_argument("bound_constants: requires t >= 2");
  const double tau_c = (std::sqrt(2.0) - 1.0) / std::sqrt(static_cast<double>(t - 1));
  const double alpha = 2.0 * tau_c / std::pow(std::sqrt(2.0) + tau_c, 2);
  return {tau_c, alpha};
}

double eps_ub_from_eps_star(double eps_star, int t) {
  const double st = std::sqrt(static_cast<double>(t));
  const double st1 = std::sqrt(static_cast<double>(t - 1));
  const double rad = 1.0 - 2.0 * st1 * eps_star - (t - 1) * eps_star * eps_star;
  if (rad <= 0.0) return std::numeric_limits<double>::infinity();
  return (1.0 + st * eps_star) / std::sqrt(rad) - 1.0;
}

BoundResult error_bound(const Matrix& w, const Matrix& w_tilde,
                          double r_tilde, double delta_a,
                          const GammaSpec& gamma, const Partition& tau,
                          double omega_uniq, double omega_robu) {
  const int t = tau.t();
  BoundResult out;
  std::tie(out.tau_const, out.alpha_const) = bound_constants(t);

  const Eigen::FullPivLU<Matrix> lu(w);
  if (!lu.isInvertible())
    throw std::invalid_argument("error_bound: W is singular");
  const Matrix q = lu.solve(w_tilde);

  Eigen::JacobiSVD<Matrix> svd_q(q);
  const Vector& sq = svd_q.singularValues();
  if (sq(sq.size() - 1) <= 0.0)
    throw std::invalid_argument("error_bound: W~ is singular");
  out.q_inv_norm = 1.0 / sq(sq.size() - 1);
  out.kappa_q = sq(0) / sq(sq.size() - 1);

  const double w_norm = w.operatorNorm();
  const double wt_norm = w_tilde.operatorNorm();
  out.delta = out.q_inv_norm * out.q_inv_norm * r_tilde +
              2.0 * out.q_inv_norm * w_norm * wt_norm * delta_a;

  const double g = gamma.g;
  double threshold = out.alpha_const * g * omega_uniq / out.kappa_q;
  if (std::isfinite(omega_robu))
    threshold = std::min(threshold, (1.0 - 2.0 * out.alpha_const) * g *
                                        omega_robu / std::sqrt(2.0));

  if (omega_uniq > 0.0) {
    out.eps_star = out.tau_const * out.kappa_q * out.delta /
                   (out.alpha_const * g * omega_uniq);
  } else {
    out.eps_star = std::numeric_limits<double>::infinity();
  }
  out.ratio = threshold > 0.0 ? out.delta / threshold
                              : std::numeric_limits<double>::infinity();
  out.condition_holds = out.ratio < 1.0;
  out.eps_ub = out.condition_holds
                   ? eps_ub_from_eps_star(out.eps_star, t)
                   : std::numeric_limits<double>::quiet_NaN();
  return out;
}

double condition_number(const MatrixSet& a, const Matrix& w,
                        const Partition& tau, double omega_uniq) {
  if (!(omega_uniq > 0.0)) return std::numeric_limits<double>::infinity();
  const auto [tau_c, alpha] = bound_constants(tau.t());
  const double t = tau.t();
  const double w_norm = w.operatorNorm();
  return tau_c / alpha * (std::sqrt(t) + std::sqrt(t - 1.0)) * w_norm * w_norm *
         set_norm(a) / omega_uniq;
}

BoundContext estimated_context(const MatrixSet& a_tilde, const Matrix& w_tilde,
                               const Partition& tau) {
  BoundContext ctx;
  ctx.w = w_tilde;
  ctx.delta_a = 0.0;
  const ModuliReport rep =
      compute_moduli(DiagonalizedSet::from_congruence(a_tilde, w_tilde, tau));
  ctx.omega_uniq = rep.omega_uniq;
  ctx.omega_robu = rep.omega_robu;
  return ctx;
}

namespace {

GammaEvaluation evaluate_gamma(const GammaSpec& gamma, const MatrixSet& a_tilde,
                               const Matrix& w_tilde, const Partition& tau,
                               const BoundContext& ctx) {
  GammaEvaluation ev;
  ev.gamma = gamma;
  const Residuals res = residuals(a_tilde, w_tilde, gamma, tau);
  ev.r_tilde = res.r_tilde;
  ev.eps_berr = backward_error(a_tilde, w_tilde, gamma, tau).eps_berr;
  ev.bound = error_bound(ctx.w, w_tilde, res.r_tilde, ctx.delta_a, gamma, tau,
                           ctx.omega_uniq, ctx.omega_robu);
  return ev;
}

// Strictly better: prefer admissible; among admissible smaller eps_ub,
// otherwise smaller ratio.
bool better(const GammaEvaluation& a, const GammaEvaluation& b) {
  if (a.bound.condition_holds != b.bound.condition_holds)
    return a.bound.condition_holds;
  if (a.bound.condition_holds) return a.bound.eps_ub < b.bound.eps_ub;
  return a.bound.ratio < b.bound.ratio;
}

}  // namespace

GammaEvaluation select_gamma(const MatrixSet& a_tilde, const Matrix& w_tilde,
                             const Partition& tau, const BoundContext& ctx,
                             int n_random, std::uint64_t seed) {
  GammaEvaluation best =
      evaluate_gamma(default_gamma(tau), a_tilde, w_tilde, tau, ctx);
  Rng rng = Rng::stream(seed, 0);
  for (int s = 0; s < n_random; ++s) {
    std::vector<double> values(tau.t());
    double gap = 0.0;
    do {
      for (double& v : values) v = rng.uniform_open(-1.0, 1.0);
      gap = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < values.size(); ++j)
        for (std::size_t k = j + 1; k < values.size(); ++k)
          gap = std::min(gap, std::abs(values[j] - values[k]));
    } while (gap < 1e-3);
    const GammaEvaluation ev = evaluate_gamma(
        GammaSpec::from_values(values), a_tilde, w_tilde, tau, ctx);
    if (better(ev, best)) best = ev;
  }
  return best;
}

GammaEvaluation select_gamma(const MatrixSet& a_tilde, const Matrix& w_tilde,
                             const Partition& tau, int n_random,
                             std::uint64_t seed) {
  return select_gamma(a_tilde, w_tilde, tau,
                      estimated_context(a_tilde, w_tilde, tau), n_random, seed);
}

AnalysisReport analyze(const MatrixSet& a_clean, const MatrixSet& a_noisy,
                       const Matrix& w_true, const Matrix& w_tilde,
                       const Partition& tau, int gamma_samples,
                       std::uint64_t gamma_seed) {
  AnalysisReport rep;

  const ModuliReport moduli =
      compute_moduli(DiagonalizedSet::from_congruence(a_clean, w_true, tau));
  rep.omega_uniq = moduli.omega_uniq;
  rep.omega_robu = moduli.omega_robu;
  rep.nondivisible_certified = moduli.nondivisible_certified;

  BoundContext oracle;
  oracle.w = w_true;
  oracle.delta_a = set_distance(a_noisy, a_clean);
  oracle.omega_uniq = moduli.omega_uniq;
  oracle.omega_robu = moduli.omega_robu;

  const GammaEvaluation ev =
      select_gamma(a_noisy, w_tilde, tau, oracle, gamma_samples, gamma_seed);
  rep.gammas = ev.gamma.gammas;
  rep.g = ev.gamma.g;
  rep.r_tilde = ev.r_tilde;
  rep.eps_berr = ev.eps_berr;
  rep.delta_a = oracle.delta_a;
  rep.delta = ev.bound.delta;
  rep.tau_const = ev.bound.tau_const;
  rep.alpha_const = ev.bound.alpha_const;
  rep.eps_star = ev.bound.eps_star;
  rep.ratio = ev.bound.ratio;
  rep.condition_holds = ev.bound.condition_holds;
  rep.eps_ub = ev.bound.eps_ub;
  rep.kappa_q = ev.bound.kappa_q;
  rep.q_inv_norm2 = ev.bound.q_inv_norm;

  rep.w_norm2 = w_true.operatorNorm();
  rep.w_tilde_norm2 = w_tilde.operatorNorm();
  rep.a_norm_f = set_norm(a_clean);
  rep.cond_a = condition_number(a_clean, w_true, tau, moduli.omega_uniq);

  rep.align_error = align(w_true, w_tilde, tau).error;

  const BoundContext est_ctx = estimated_context(a_noisy, w_tilde, tau);
  const GammaEvaluation est = select_gamma(a_noisy, w_tilde, tau, est_ctx,
                                           gamma_samples, gamma_seed);
  rep.est_omega_uniq = est_ctx.omega_uniq;
  rep.est_omega_robu = est_ctx.omega_robu;
  rep.est_ratio = est.bound.ratio;
  rep.est_condition_holds = est.bound.condition_holds;
  rep.est_eps_ub = est.bound.eps_ub;
  rep.est_cond_a = condition_number(a_noisy, w_tilde, tau, est_ctx.omega_uniq);

  return rep;
}

}  // namespace jbd
