#include "jbd/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/SVD>

#include "jbd/rng.hpp"

namespace jbd {

double objective(const Matrix& w, const MatrixSet& a, const Partition& tau) {
  double f = 0.0;
  for (const auto& ai : a)
    f += offbdiag(w.transpose() * ai * w, tau).squaredNorm();
  return f;
}

Matrix objective_gradient(const Matrix& w, const MatrixSet& a,
                          const Partition& tau) {
  Matrix grad = Matrix::Zero(w.rows(), w.cols());
  for (const auto& ai : a) {
    const Matrix o = offbdiag(w.transpose() * ai * w, tau);
    grad += 2.0 * (ai * w * o.transpose() + ai.transpose() * w * o);
  }
  return grad;
}

namespace {

// Projection onto the tangent space of the per-group orthonormality
// constraint: per column group, xi_j - W_j sym(W_j^T xi_j).
Matrix tangent_project(const Matrix& w, const Matrix& xi, const Partition& tau) {
  Matrix out = xi;
  for (int j = 0; j < tau.t(); ++j) {
    const auto wj = w.middleCols(tau.offset(j), tau.size(j));
    const auto xj = xi.middleCols(tau.offset(j), tau.size(j));
    const Matrix cross = wj.transpose() * xj;
    out.middleCols(tau.offset(j), tau.size(j)) =
        xj - wj * (0.5 * (cross + cross.transpose()));
  }
  return out;
}

double smallest_singular_value(const Matrix& w) {
  const Vector sv = Eigen::JacobiSVD<Matrix>(w).singularValues();
  return sv(sv.size() - 1);
}

struct RunResult {
  Matrix w;
  double f = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
  bool drifted_singular = false;
};

RunResult run_from(Matrix w, const MatrixSet& a, const Partition& tau,
                   const SolverConfig& cfg, double a_norm2) {
  constexpr double armijo_c = 1e-4;
  RunResult res;

  w = normalize_to_w(w, tau);
  double f = objective(w, a, tau);
  Matrix g = tangent_project(w, objective_gradient(w, a, tau), tau);
  Matrix d = -g;
  double g_norm2 = g.squaredNorm();
  double alpha_prev = 1.0 / (1.0 + std::sqrt(g_norm2));

  int iter = 0;
  for (; iter < cfg.max_iters; ++iter) {
    if (std::sqrt(g_norm2) <= cfg.grad_tol * (1.0 + std::abs(f)) ||
        f <= cfg.objective_tol * a_norm2) {
      res.converged = true;
      break;
    }

    double slope = g.cwiseProduct(d).sum();
    if (slope >= 0.0) {  // stale conjugate direction; steepest descent restart
      d = -g;
      slope = -g_norm2;
    }

    // Backtracking Armijo on the retracted candidate, with one quadratic
    // interpolation refinement once a decrease is found.
    double alpha = std::min(4.0 * alpha_prev, 1e6);
    double f_new = std::numeric_limits<double>::infinity();
    Matrix w_new;
    bool accepted = false;
    while (alpha > 1e-18) {
      try {
        w_new = normalize_to_w(w + alpha * d, tau);
        f_new = objective(w_new, a, tau);
        if (f_new <= f + armijo_c * alpha * slope) {
          accepted = true;
          break;
        }
      } catch (const std::invalid_argument&) {
        // retraction hit a singular candidate; shrink
      }
      alpha *= 0.5;
    }
    if (!accepted) break;  // numerical floor: no further descent possible

    const double quad_alpha =
        -slope * alpha * alpha / (2.0 * (f_new - f - slope * alpha));
    if (std::isfinite(quad_alpha) && quad_alpha > 0.0 &&
        quad_alpha < 16.0 * alpha) {
      try {
        const Matrix w_quad = normalize_to_w(w + quad_alpha * d, tau);
        const double f_quad = objective(w_quad, a, tau);
        if (f_quad < f_new) {
          w_new = w_quad;
          f_new = f_quad;
          alpha = quad_alpha;
        }
      } catch (const std::invalid_argument&) {
      }
    }

    if (smallest_singular_value(w_new) < 1e-10) {
      res.drifted_singular = true;
      break;
    }

    const Matrix g_new =
        tangent_project(w_new, objective_gradient(w_new, a, tau), tau);
    const double g_new_norm2 = g_new.squaredNorm();

    // Polak-Ribiere+ with the previous gradient and direction transported
    // (projected) onto the new tangent space.
    const Matrix g_old_t = tangent_project(w_new, g, tau);
    const double beta =
        std::max(0.0, g_new.cwiseProduct(g_new - g_old_t).sum() / g_norm2);
    d = -g_new + beta * tangent_project(w_new, d, tau);

    w = std::move(w_new);
    f = f_new;
    g = g_new;
    g_norm2 = g_new_norm2;
    alpha_prev = alpha;
  }

  res.w = std::move(w);
  res.f = f;
  res.iterations = iter;
  if (!res.converged)
    res.converged = std::sqrt(g_norm2) <= cfg.grad_tol * (1.0 + std::abs(f)) ||
                    f <= cfg.objective_tol * a_norm2;
  return res;
}

}  // namespace

SolverOutcome solve(const MatrixSet& a_tilde, const Partition& tau,
                    const SolverConfig& cfg) {
  if (a_tilde.empty())
    throw std::invalid_argument("solve: need at least one matrix");
  for (const auto& ai : a_tilde)
    if (ai.rows() != tau.n() || ai.cols() != tau.n())
      throw std::invalid_argument("solve: matrix dimension mismatch");
  if (cfg.max_iters < 1 || cfg.grad_tol <= 0.0 || cfg.objective_tol <= 0.0)
    throw std::invalid_argument("solve: invalid configuration");

  const double a_norm = set_norm(a_tilde);
  const double a_norm2 = a_norm * a_norm;

  RunResult best;
  const int runs = cfg.warm_start ? 1 : std::max(1, cfg.restarts);
  std::uint64_t stream_id = 0;
  for (int r = 0; r < runs; ++r) {
    Matrix w0;
    if (cfg.warm_start) {
      w0 = *cfg.warm_start;
    } else {
      int attempts = 0;
      do {
        Rng rng = Rng::stream(cfg.seed, stream_id++);
        w0 = rng.normal_matrix(tau.n(), tau.n());
      } while (smallest_singular_value(w0) < 1e-8 && ++attempts < 16);
    }
    RunResult res = run_from(std::move(w0), a_tilde, tau, cfg, a_norm2);
    if (res.f < best.f) best = std::move(res);
    if (best.converged && best.f <= cfg.objective_tol * a_norm2) break;
  }

  SolverOutcome out;
  out.w_tilde = std::move(best.w);
  out.objective = best.f;
  out.iterations = best.iterations;
  out.converged = best.converged;
  return out;
}

}  // namespace jbd
