// Command-line driver: instance generation, solving, single-instance
// analysis, and the randomized experiment scenarios.

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "jbd/alignment.hpp"
#include "jbd/experiment.hpp"
#include "jbd/instance.hpp"
#include "jbd/perturbation.hpp"
#include "jbd/solver.hpp"

namespace {

std::vector<int> parse_tau(const std::string& s) {
  std::vector<int> sizes;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    sizes.push_back(std::stoi(item));
  }
  if (sizes.empty()) throw CLI::ValidationError("--tau", "empty partition");
  return sizes;
}

std::vector<double> parse_grid(const std::string& s) {
  std::vector<double> grid;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    grid.push_back(std::stod(item));
  }
  return grid;
}

// Default output directory; overridable per-invocation with --out.
std::string out_dir() {
  const char* env = std::getenv("JBD_OUT_DIR");
  return env ? env : ".";
}

std::string join_path(const std::string& dir, const std::string& name) {
  if (name.find('/') != std::string::npos) return name;  // already a path
  return dir + "/" + name;
}

nlohmann::json report_to_json(const jbd::AnalysisReport& r) {
  nlohmann::json j;
  j["omega_uniq"] = r.omega_uniq;
  if (std::isfinite(r.omega_robu))
    j["omega_robu"] = r.omega_robu;
  else
    j["omega_robu"] = "inf";
  j["nondivisible_certified"] = r.nondivisible_certified;
  j["gammas"] = r.gammas;
  j["g"] = r.g;
  j["r_tilde"] = r.r_tilde;
  j["delta_a"] = r.delta_a;
  j["delta"] = r.delta;
  j["tau_const"] = r.tau_const;
  j["alpha_const"] = r.alpha_const;
  j["eps_star"] = r.eps_star;
  j["ratio"] = r.ratio;
  j["condition_holds"] = r.condition_holds;
  if (r.condition_holds) j["eps_ub"] = r.eps_ub;
  j["eps_berr"] = r.eps_berr;
  j["cond"] = r.cond_a;
  j["kappa_q"] = r.kappa_q;
  j["w_norm2"] = r.w_norm2;
  j["w_tilde_norm2"] = r.w_tilde_norm2;
  j["q_inv_norm2"] = r.q_inv_norm2;
  j["a_norm_f"] = r.a_norm_f;
  j["error"] = r.align_error;
  j["est_omega_uniq"] = r.est_omega_uniq;
  if (std::isfinite(r.est_omega_robu))
    j["est_omega_robu"] = r.est_omega_robu;
  else
    j["est_omega_robu"] = "inf";
  j["est_ratio"] = r.est_ratio;
  j["est_condition_holds"] = r.est_condition_holds;
  if (r.est_condition_holds) j["est_eps_ub"] = r.est_eps_ub;
  j["est_cond"] = r.est_cond_a;
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Perturbation analysis toolkit for joint block diagonalization"};
  app.require_subcommand(1);

  // ---- generate ----
  auto* gen = app.add_subcommand("generate", "Generate a random instance file");
  std::string gen_tau = "3,3,3", gen_out = "instance.json";
  int gen_m = 16;
  double gen_xi = 1e-12;
  std::uint64_t gen_seed = 0;
  gen->add_option("--tau", gen_tau, "Partition sizes, comma separated");
  gen->add_option("--m", gen_m, "Number of matrices");
  gen->add_option("--xi", gen_xi, "Noise level");
  gen->add_option("--seed", gen_seed, "RNG seed");
  gen->add_option("--out", gen_out, "Output path");

  // ---- solve ----
  auto* sol = app.add_subcommand("solve", "Compute an approximate diagonalizer");
  std::string sol_instance, sol_out = "w_tilde.json";
  bool sol_warm = false;
  jbd::SolverConfig sol_cfg;
  sol->add_option("instance", sol_instance, "Instance file")->required();
  sol->add_option("--out", sol_out, "Output matrix path");
  sol->add_flag("--warm-start", sol_warm, "Initialize from the bundled truth");
  sol->add_option("--max-iters", sol_cfg.max_iters, "Iteration cap");
  sol->add_option("--grad-tol", sol_cfg.grad_tol, "Gradient tolerance");
  sol->add_option("--objective-tol", sol_cfg.objective_tol,
                  "Objective tolerance (relative to ||A||_F^2)");
  sol->add_option("--restarts", sol_cfg.restarts, "Random restarts");
  sol->add_option("--solver-seed", sol_cfg.seed, "Solver RNG seed");

  // ---- analyze ----
  auto* ana = app.add_subcommand("analyze", "Analyze one instance");
  std::string ana_instance, ana_w, ana_out;
  bool ana_solve = false, ana_warm = false;
  int ana_gamma_samples = 49;
  std::uint64_t ana_gamma_seed = 0;
  jbd::SolverConfig ana_cfg;
  ana->add_option("instance", ana_instance, "Instance file")->required();
  ana->add_option("--w-tilde", ana_w, "Diagonalizer matrix file");
  ana->add_flag("--solve", ana_solve, "Solve for the diagonalizer instead");
  ana->add_flag("--warm-start", ana_warm, "Warm start the embedded solve");
  ana->add_option("--gamma-samples", ana_gamma_samples, "Random Gamma draws");
  ana->add_option("--gamma-seed", ana_gamma_seed, "Gamma RNG seed");
  ana->add_option("--out", ana_out, "Write report JSON here (default stdout)");
  ana->add_option("--max-iters", ana_cfg.max_iters, "Iteration cap");
  ana->add_option("--grad-tol", ana_cfg.grad_tol, "Gradient tolerance");
  ana->add_option("--restarts", ana_cfg.restarts, "Random restarts");
  ana->add_option("--solver-seed", ana_cfg.seed, "Solver RNG seed");

  // ---- experiment ----
  auto* exp = app.add_subcommand("experiment", "Run a test scenario");
  std::string exp_scenario = "single", exp_tau = "3,3,3", exp_grid = "0";
  std::string exp_out = "experiment", exp_format = "csv";
  jbd::ExperimentSpec spec;
  bool exp_median = false, exp_warm = false, exp_random_init = false;
  exp->add_option("--scenario", exp_scenario,
                  "vary-m | vary-n | vary-t | vary-noise | vary-cond | single");
  exp->add_option("--grid", exp_grid, "Comma-separated grid values");
  exp->add_option("--tau", exp_tau, "Base partition sizes");
  exp->add_option("--m", spec.m, "Number of matrices");
  exp->add_option("--xi", spec.xi, "Noise level");
  exp->add_option("--trials", spec.trials, "Trials per grid point");
  exp->add_option("--seed", spec.seed, "Master seed");
  exp->add_option("--gamma-samples", spec.gamma_samples, "Random Gamma draws");
  exp->add_flag("--warm-start", exp_warm, "Warm start the solver from truth");
  exp->add_flag("--random-init", exp_random_init,
                "Random solver initialization (overrides the warm default)");
  exp->add_flag("--median", exp_median, "Aggregate trials by median");
  exp->add_option("--out", exp_out, "Output file stem");
  exp->add_option("--format", exp_format, "csv | jsonl");
  exp->add_option("--max-iters", spec.solver.max_iters, "Solver iteration cap");
  exp->add_option("--grad-tol", spec.solver.grad_tol, "Solver gradient tolerance");
  exp->add_option("--restarts", spec.solver.restarts, "Solver random restarts");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const jbd::InstanceBundle bundle =
          jbd::generate(jbd::Partition(parse_tau(gen_tau)), gen_m, gen_xi, gen_seed);
      const std::string path = join_path(out_dir(), gen_out);
      jbd::save_instance(bundle, path);
      std::cout << "wrote " << path << '\n';
      return 0;
    }

    if (*sol) {
      const jbd::InstanceBundle bundle = jbd::load_instance(sol_instance);
      if (sol_warm) sol_cfg.warm_start = bundle.w_true;
      const jbd::SolverOutcome outcome =
          jbd::solve(bundle.a_noisy, bundle.tau, sol_cfg);
      const std::string path = join_path(out_dir(), sol_out);
      jbd::save_matrix(outcome.w_tilde, path);
      std::cout << "objective " << outcome.objective << " after "
                << outcome.iterations << " iterations ("
                << (outcome.converged ? "converged" : "not converged")
                << "), wrote " << path << '\n';
      return 0;
    }

    if (*ana) {
      const jbd::InstanceBundle bundle = jbd::load_instance(ana_instance);
      jbd::Matrix w_tilde;
      bool solver_converged = true;
      if (ana_solve) {
        if (ana_warm) ana_cfg.warm_start = bundle.w_true;
        const jbd::SolverOutcome outcome =
            jbd::solve(bundle.a_noisy, bundle.tau, ana_cfg);
        w_tilde = outcome.w_tilde;
        solver_converged = outcome.converged;
      } else if (!ana_w.empty()) {
        w_tilde = jbd::load_matrix(ana_w);
        if (!jbd::is_member_w(w_tilde, bundle.tau, 1e-8))
          w_tilde = jbd::normalize_to_w(w_tilde, bundle.tau);
      } else {
        std::cerr << "analyze: need --w-tilde FILE or --solve\n";
        return 1;
      }

      const jbd::AnalysisReport report =
          jbd::analyze(bundle.a_clean, bundle.a_noisy, bundle.w_true, w_tilde,
                       bundle.tau, ana_gamma_samples, ana_gamma_seed);
      nlohmann::json j = report_to_json(report);
      j["instance"] = ana_instance;
      j["instance_hash"] = jbd::file_content_hash(ana_instance);
      j["solver_converged"] = solver_converged;
      if (!ana_out.empty()) {
        const std::string path = join_path(out_dir(), ana_out);
        std::ofstream out(path);
        out << j.dump(1) << '\n';
      } else {
        std::cout << j.dump(1) << '\n';
      }
      return report.condition_holds ? 0 : 2;
    }

    if (*exp) {
      spec.scenario = jbd::scenario_from_string(exp_scenario);
      spec.grid = parse_grid(exp_grid);
      spec.tau_sizes = parse_tau(exp_tau);
      spec.warm_start = exp_warm || !exp_random_init;
      spec.median_aggregate = exp_median;
      std::vector<jbd::ExperimentRow> rows = jbd::run_experiment(spec);
      if (spec.median_aggregate) rows = jbd::aggregate_median(rows);

      const std::string stem = join_path(out_dir(), exp_out);
      if (exp_format == "jsonl") {
        std::ofstream out(stem + ".jsonl");
        jbd::write_jsonl(out, rows);
        std::cout << "wrote " << stem << ".jsonl\n";
      } else if (exp_format == "csv") {
        std::ofstream out(stem + ".csv");
        jbd::write_csv(out, spec.scenario, rows);
        std::cout << "wrote " << stem << ".csv\n";
      } else {
        std::cerr << "experiment: unknown format '" << exp_format << "'\n";
        return 1;
      }
      std::ofstream plot(stem + "_plot.csv");
      jbd::write_plot_csv(plot, spec.scenario, rows);
      std::cout << "wrote " << stem << "_plot.csv\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
