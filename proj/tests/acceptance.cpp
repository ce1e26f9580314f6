// Acceptance suite: every release gate in one binary, one pass/fail line
// each. Exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <Eigen/SVD>

#include "jbd/alignment.hpp"
#include "jbd/experiment.hpp"
#include "jbd/instance.hpp"
#include "jbd/kron.hpp"
#include "jbd/moduli.hpp"
#include "jbd/perturbation.hpp"
#include "jbd/rng.hpp"
#include "jbd/solver.hpp"

using jbd::DiagonalizedSet;
using jbd::Matrix;
using jbd::MatrixSet;
using jbd::Partition;
using jbd::Vector;

namespace {

int failures = 0;

void report(int number, const std::string& label, bool pass,
            const std::string& detail = "") {
  std::printf("[%s] criterion %2d: %s%s%s\n", pass ? "PASS" : "FAIL", number,
              label.c_str(), detail.empty() ? "" : " -- ", detail.c_str());
  if (!pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

DiagonalizedSet scalar_pair(double s) {
  const Partition tau({1, 1});
  std::vector<std::vector<Matrix>> blocks(2);
  blocks[0] = {Matrix::Identity(1, 1), Matrix::Identity(1, 1)};
  blocks[1] = {Matrix::Identity(1, 1), Matrix::Constant(1, 1, 1.0 + s)};
  return DiagonalizedSet(tau, std::move(blocks));
}

DiagonalizedSet coupled_pair(double s) {
  const Partition tau({2, 2});
  Matrix c(2, 2);
  c << 1.0, 1.0 + s, 1.0, 1.0;
  std::vector<std::vector<Matrix>> blocks(2);
  blocks[0] = {Matrix::Identity(2, 2), c};
  blocks[1] = {c, Matrix::Identity(2, 2)};
  return DiagonalizedSet(tau, std::move(blocks));
}

char buf[256];

// 1. closed-form modulus of uniqueness, scalar example
void criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  bool pass = true;
  std::string detail;
  for (double s : {0.5, 1.0, 2.0}) {
    const auto rep = jbd::compute_moduli(scalar_pair(s));
    const double closed =
        std::sqrt(s * s + 2 * s + 4 - (s + 2) * std::sqrt(s * s + 4));
    if (std::abs(rep.omega_uniq - closed) > 1e-10) {
      pass = false;
      std::snprintf(buf, sizeof(buf), "omega_uniq(%g)=%.12g want %.12g", s,
                    rep.omega_uniq, closed);
      detail = buf;
    }
    if (!std::isinf(rep.omega_robu)) {
      pass = false;
      detail = "omega_robu not infinite for the all-ones partition";
    }
  }
  const double dt = seconds_since(t0);
  if (dt >= 1.0) {
    pass = false;
    detail = "runtime " + std::to_string(dt) + "s";
  }
  report(1, "closed-form omega_uniq, scalar two-block example", pass, detail);
}

// 2. closed-form modulus of non-divisibility
void criterion2() {
  const auto t0 = std::chrono::steady_clock::now();
  bool pass = true;
  std::string detail;
  for (double s : {1e-1, 1e-2, 1e-3}) {
    const auto rep = jbd::compute_moduli(coupled_pair(s));
    if (std::abs(rep.omega_robu - s) > 1e-8 * s) {
      pass = false;
      std::snprintf(buf, sizeof(buf), "omega_robu(%g)=%.12g", s, rep.omega_robu);
      detail = buf;
    }
    if (s == 1e-3 && std::abs(rep.omega_uniq - 0.5858) > 5e-3) {
      pass = false;
      std::snprintf(buf, sizeof(buf), "omega_uniq(%g)=%.6g want 0.5858", s,
                    rep.omega_uniq);
      detail = buf;
    }
  }
  const double dt = seconds_since(t0);
  if (dt >= 1.0) {
    pass = false;
    detail = "runtime " + std::to_string(dt) + "s";
  }
  report(2, "closed-form omega_robu, coupled two-block example", pass, detail);
}

// 3. alignment oracle and exact-equivalence recovery
void criterion3() {
  bool pass = true;
  std::string detail;
  const Partition tau11({1, 1});
  for (double theta : {1e-3, 1e-2, 1e-1}) {
    Matrix wt(2, 2);
    wt << std::cos(theta), std::sin(theta), -std::sin(theta), std::cos(theta);
    const double err = jbd::align(Matrix::Identity(2, 2), wt, tau11).error;
    if (std::abs(err - 2.0 * std::sin(theta / 2.0)) > 1e-12) {
      pass = false;
      std::snprintf(buf, sizeof(buf), "rotation theta=%g error=%.15g", theta, err);
      detail = buf;
    }
  }
  int recovered = 0;
  for (const auto& sizes : {std::vector<int>{1, 2, 3}, {3, 3, 3}}) {
    const Partition tau(sizes);
    jbd::Rng rng(2024);
    for (int trial = 0; trial < 50; ++trial) {
      const Matrix w =
          jbd::normalize_to_w(rng.normal_matrix(tau.n(), tau.n()), tau);
      const Matrix wt = jbd::apply_equivalence(
          w, tau, jbd::BlockOrthogonal::random(tau, rng),
          jbd::BlockPermutation::random(tau, rng));
      if (jbd::align(w, wt, tau).error <= 1e-12) ++recovered;
    }
  }
  if (recovered != 100) {
    pass = false;
    detail = "recovered " + std::to_string(recovered) + "/100 equivalences";
  }
  report(3, "alignment rotation oracle and equivalence recovery", pass, detail);
}

// 4. structural identities of the Kronecker systems
void criterion4() {
  bool pass = true;
  std::string detail;
  jbd::Rng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<int> sizes;
    const int t = 2 + static_cast<int>(rng.below(2));
    for (int j = 0; j < t; ++j) sizes.push_back(1 + static_cast<int>(rng.below(4)));
    const Partition tau(sizes);
    const int m = 1 + static_cast<int>(rng.below(8));
    std::vector<std::vector<Matrix>> blocks(m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < t; ++j)
        blocks[i].push_back(rng.normal_matrix(tau.size(j), tau.size(j)));
    const DiagonalizedSet ds(tau, blocks);

    for (int j = 0; j < t && pass; ++j) {
      const Matrix gjj = jbd::build_gjj(ds, j);
      const int nj = tau.size(j);
      const Vector vi = jbd::vec(Matrix::Identity(nj, nj));
      if ((gjj * vi).norm() > 1e-12 * gjj.operatorNorm() * nj) {
        pass = false;
        detail = "G_jj vec(I) not in the kernel";
      }
      for (int k = j + 1; k < t && pass; ++k) {
        const Matrix g = jbd::build_gjk(ds, j, k);
        const Matrix mjk = jbd::build_mjk(ds, j, k);
        if ((mjk - g.transpose() * g).norm() > 1e-12 * mjk.norm()) {
          pass = false;
          detail = "M_jk != G_jk^T G_jk";
        }
        // basis-indexed brute-force operator
        const int dim = tau.size(j) * tau.size(k);
        Matrix bf(2 * m * dim, 2 * dim);
        for (int col = 0; col < 2 * dim; ++col) {
          Vector e = Vector::Zero(2 * dim);
          e(col) = 1.0;
          const Matrix zjk = jbd::unvec(e.head(dim), tau.size(j), tau.size(k));
          const Matrix zkj_t =
              jbd::unvec(-e.tail(dim), tau.size(j), tau.size(k));
          for (int i = 0; i < m; ++i) {
            const Matrix& a = ds.blocks[i][j];
            const Matrix& b = ds.blocks[i][k];
            bf.col(col).segment(2 * i * dim, dim) =
                jbd::vec(a * zjk - zkj_t * b);
            bf.col(col).segment((2 * i + 1) * dim, dim) =
                jbd::vec(a.transpose() * zjk - zkj_t * b.transpose());
          }
        }
        if ((g - bf).norm() != 0.0) {
          pass = false;
          detail = "G_jk differs from the basis-indexed operator";
        }
      }
    }
    if (!pass) break;
  }
  report(4, "structural identities M_jk, kernel of G_jj, operator oracle",
         pass, detail);
}

// 5. invariance of moduli, condition number, and norm range
void criterion5() {
  bool pass = true;
  std::string detail;
  const Partition tau({1, 2, 3});
  const auto bundle = jbd::generate(tau, 6, 0.0, 7);
  const auto base = jbd::compute_moduli(
      DiagonalizedSet::from_congruence(bundle.a_clean, bundle.w_true, tau));
  const double base_cond = jbd::condition_number(bundle.a_clean, bundle.w_true,
                                                 tau, base.omega_uniq);
  jbd::Rng rng(8);
  for (int trial = 0; trial < 50 && pass; ++trial) {
    const Matrix w2 = jbd::apply_equivalence(
        bundle.w_true, tau, jbd::BlockOrthogonal::random(tau, rng),
        jbd::BlockPermutation::random(tau, rng));
    const auto rep = jbd::compute_moduli(
        DiagonalizedSet::from_congruence(bundle.a_clean, w2, tau));
    const double cond =
        jbd::condition_number(bundle.a_clean, w2, tau, rep.omega_uniq);
    if (std::abs(rep.omega_uniq - base.omega_uniq) >
            1e-10 * (1.0 + base.omega_uniq) ||
        std::abs(rep.omega_robu - base.omega_robu) >
            1e-10 * (1.0 + base.omega_robu) ||
        std::abs(cond - base_cond) > 1e-10 * base_cond) {
      pass = false;
      std::snprintf(buf, sizeof(buf),
                    "trial %d: omega_uniq %.12g vs %.12g, cond %.12g vs %.12g",
                    trial, rep.omega_uniq, base.omega_uniq, cond, base_cond);
      detail = buf;
    }
  }
  for (const auto& sizes : {std::vector<int>{1, 2, 3}, {3, 3, 3}}) {
    const Partition taux(sizes);
    jbd::Rng rng2(9);
    for (int trial = 0; trial < 50; ++trial) {
      const Matrix w =
          jbd::normalize_to_w(rng2.normal_matrix(taux.n(), taux.n()), taux);
      const double norm = w.operatorNorm();
      if (norm < 1.0 - 1e-12 ||
          norm > std::sqrt(static_cast<double>(taux.t())) + 1e-12) {
        pass = false;
        std::snprintf(buf, sizeof(buf), "||W||_2 = %.15g out of range", norm);
        detail = buf;
      }
    }
  }
  report(5, "invariance under equivalence; norm range of members", pass, detail);
}

// 6. backward-error construction
void criterion6() {
  bool pass = true;
  std::string detail;
  for (std::uint64_t seed = 0; seed < 20 && pass; ++seed) {
    const Partition tau(seed % 2 == 0 ? std::vector<int>{1, 2, 3}
                                      : std::vector<int>{2, 2});
    const auto bundle = jbd::generate(tau, 5, 1e-6, 100 + seed);
    jbd::Rng kick(200 + seed);
    const Matrix w_tilde = jbd::normalize_to_w(
        bundle.w_true + 1e-5 * kick.normal_matrix(tau.n(), tau.n()), tau);
    const auto gamma = jbd::default_gamma(tau);
    const auto be = jbd::backward_error(bundle.a_noisy, w_tilde, gamma, tau);
    double e2 = 0.0;
    for (std::size_t i = 0; i < bundle.a_noisy.size(); ++i) {
      const Matrix fixed =
          w_tilde.transpose() * (bundle.a_noisy[i] + be.e[i]) * w_tilde;
      if (jbd::offbdiag(fixed, tau).norm() > 1e-12 * bundle.a_noisy[i].norm()) {
        pass = false;
        detail = "perturbed set not exactly block diagonalized";
      }
      e2 += be.e[i].squaredNorm();
    }
    const double rel = std::sqrt(e2) / jbd::set_norm(bundle.a_noisy);
    if (rel > be.eps_berr * (1.0 + 1e-12)) {
      pass = false;
      std::snprintf(buf, sizeof(buf), "||E||/||A|| = %.3e > eps_berr = %.3e",
                    rel, be.eps_berr);
      detail = buf;
    }
  }
  report(6, "backward perturbation diagonalizes exactly within eps_berr",
         pass, detail);
}

// 7. bound validity in the table regime
void criterion7() {
  const auto t0 = std::chrono::steady_clock::now();
  bool pass = true;
  std::string detail;
  int held = 0, covered = 0, total = 0;
  std::vector<double> errors, bounds;
  for (const auto& sizes : {std::vector<int>{3, 3, 3}, {1, 2, 3}}) {
    const Partition tau(sizes);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto bundle = jbd::generate(tau, 16, 1e-12, 1000 + seed);
      jbd::SolverConfig cfg = jbd::table_regime_solver();
      cfg.warm_start = bundle.w_true;
      const auto outcome = jbd::solve(bundle.a_noisy, tau, cfg);
      const auto rep =
          jbd::analyze(bundle.a_clean, bundle.a_noisy, bundle.w_true,
                       outcome.w_tilde, tau, 49, seed);
      ++total;
      if (rep.ratio < 1.0) ++held;
      if (rep.condition_holds && rep.align_error <= rep.eps_ub) ++covered;
      errors.push_back(rep.align_error);
      if (rep.condition_holds) bounds.push_back(rep.eps_ub);
    }
  }
  const double frac_held = static_cast<double>(held) / total;
  const double frac_cov = static_cast<double>(covered) / total;
  std::sort(errors.begin(), errors.end());
  std::sort(bounds.begin(), bounds.end());
  const double med_err = errors[errors.size() / 2];
  const double med_ub = bounds.empty() ? 0.0 : bounds[bounds.size() / 2];
  if (frac_held < 0.95 || frac_cov < 0.95) pass = false;
  if (med_err < 1e-13 || med_err > 1e-9) pass = false;
  if (med_ub < 1e-11 || med_ub > 1e-7) pass = false;
  const double dt = seconds_since(t0);
  if (dt >= 300.0) pass = false;
  std::snprintf(buf, sizeof(buf),
                "held %.0f%%, covered %.0f%%, median error %.2e, median bound "
                "%.2e, %.1fs",
                100 * frac_held, 100 * frac_cov, med_err, med_ub, dt);
  report(7, "bound holds and covers the error in the table regime", pass, buf);
}

// 8. noise scaling slopes
void criterion8() {
  bool pass = true;
  const Partition tau({3, 3, 3});
  const std::vector<double> xis = {1e-12, 1e-11, 1e-10, 1e-9, 1e-8, 1e-7};
  std::vector<double> med_err, med_ub, med_berr;
  for (double xi : xis) {
    std::vector<double> errs, ubs, berrs;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto bundle = jbd::generate(tau, 16, xi, 3000 + seed);
      jbd::SolverConfig cfg = jbd::table_regime_solver();
      cfg.warm_start = bundle.w_true;
      const auto outcome = jbd::solve(bundle.a_noisy, tau, cfg);
      const auto rep =
          jbd::analyze(bundle.a_clean, bundle.a_noisy, bundle.w_true,
                       outcome.w_tilde, tau, 49, seed);
      errs.push_back(rep.align_error);
      ubs.push_back(rep.eps_ub);
      berrs.push_back(rep.eps_berr);
    }
    auto median = [](std::vector<double> v) {
      std::sort(v.begin(), v.end());
      return v[v.size() / 2];
    };
    med_err.push_back(median(errs));
    med_ub.push_back(median(ubs));
    med_berr.push_back(median(berrs));
  }
  auto slope = [&](const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int n = static_cast<int>(xis.size());
    for (int i = 0; i < n; ++i) {
      const double lx = std::log10(xis[i]), ly = std::log10(y[i]);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
  };
  const double s_err = slope(med_err), s_ub = slope(med_ub),
               s_berr = slope(med_berr);
  if (s_err < 0.8 || s_err > 1.2 || s_ub < 0.8 || s_ub > 1.2 ||
      s_berr < 0.8 || s_berr > 1.2)
    pass = false;
  std::snprintf(buf, sizeof(buf), "slopes: error %.3f, bound %.3f, berr %.3f",
                s_err, s_ub, s_berr);
  report(8, "error, bound, and backward error scale linearly in the noise",
         pass, buf);
}

// 9. solver sanity
void criterion9() {
  bool pass = true;
  std::string detail;

  // gradient versus central finite differences
  {
    const Partition tau({2, 3});
    jbd::Rng rng(4);
    MatrixSet a = {rng.normal_matrix(5, 5), rng.normal_matrix(5, 5)};
    const Matrix w = rng.normal_matrix(5, 5);
    const Matrix grad = jbd::objective_gradient(w, a, tau);
    const double h = 1e-5;
    for (int i = 0; i < 5 && pass; ++i)
      for (int j = 0; j < 5 && pass; ++j) {
        Matrix wp = w, wm = w;
        wp(i, j) += h;
        wm(i, j) -= h;
        const double fd =
            (jbd::objective(wp, a, tau) - jbd::objective(wm, a, tau)) / (2 * h);
        if (std::abs(fd - grad(i, j)) > 1e-6 * (1.0 + std::abs(fd))) {
          pass = false;
          detail = "analytic gradient disagrees with finite differences";
        }
      }
  }

  const Partition tau({1, 2, 3});
  int good = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto bundle = jbd::generate(tau, 8, 0.0, 5000 + seed);
    jbd::SolverConfig cfg;
    cfg.seed = seed;
    cfg.restarts = 5;
    const auto outcome = jbd::solve(bundle.a_clean, tau, cfg);
    const double a2 = std::pow(jbd::set_norm(bundle.a_clean), 2);
    const double err = jbd::align(bundle.w_true, outcome.w_tilde, tau).error;
    if (outcome.objective <= 1e-12 * a2 && err <= 1e-5) ++good;
  }
  if (good < 18) pass = false;
  std::snprintf(buf, sizeof(buf), "%d/20 noiseless solves reached the truth%s%s",
                good, detail.empty() ? "" : "; ", detail.c_str());
  report(9, "solver reaches exact diagonalizers from random starts", pass, buf);
}

// 10. first-order expansion of the bound
void criterion10() {
  bool pass = true;
  std::string detail;
  for (int t = 2; t <= 9 && pass; ++t)
    for (double es : {1e-6, 1e-5, 1e-4}) {
      const double ub = jbd::eps_ub_from_eps_star(es, t);
      const double first =
          (std::sqrt(static_cast<double>(t)) + std::sqrt(t - 1.0)) * es;
      if (std::abs(ub - first) > 10.0 * t * es * es) {
        pass = false;
        std::snprintf(buf, sizeof(buf), "t=%d eps*=%g: |%.3e| > %.3e", t, es,
                      ub - first, 10.0 * t * es * es);
        detail = buf;
      }
    }
  report(10, "bound matches its first-order expansion", pass, detail);
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  criterion10();
  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
