#ifndef JBD_EXPERIMENT_HPP
#define JBD_EXPERIMENT_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "jbd/instance.hpp"
#include "jbd/perturbation.hpp"
#include "jbd/solver.hpp"

namespace jbd {

enum class Scenario { VaryM, VaryN, VaryT, VaryNoise, VaryCond, Single };

Scenario scenario_from_string(const std::string& s);
std::string to_string(Scenario s);

/// Solver settings for the randomized table scenarios: warm-started polish
/// runs until the line search hits the numerical floor, so residuals and
/// errors reflect the data rather than an early stop.
inline SolverConfig table_regime_solver() {
  SolverConfig cfg;
  cfg.max_iters = 400;
  cfg.grad_tol = 1e-14;
  cfg.objective_tol = 1e-30;
  return cfg;
}

struct ExperimentSpec {
  Scenario scenario = Scenario::Single;
  std::vector<double> grid;       // meaning depends on scenario; {0} for single
  std::vector<int> tau_sizes;     // base partition
  int m = 16;
  double xi = 1e-12;
  int trials = 1;
  std::uint64_t seed = 0;
  int gamma_samples = 49;
  bool warm_start = true;
  bool median_aggregate = false;
  SolverConfig solver = table_regime_solver();
};

/// One emitted table row: the grid coordinate plus the analysis report.
struct ExperimentRow {
  double x = 0.0;         // grid value for the scenario
  int trial = 0;
  std::uint64_t seed = 0;
  int n = 0, t = 0, m = 0;
  double xi = 0.0;
  bool solver_converged = true;
  std::string init_mode;  // "warm" or "random"
  AnalysisReport report;
};

/// Runs the scenario: for each grid point and trial, generate -> solve ->
/// align -> analyze. Per-trial seeds derive from (spec.seed, grid index,
/// trial index), so results do not depend on execution order. Solver
/// non-convergence is recorded in the row, which is retained.
std::vector<ExperimentRow> run_experiment(const ExperimentSpec& spec);

/// Median aggregation across trials per grid point (medians are taken
/// per column; boolean columns become "majority true").
std::vector<ExperimentRow> aggregate_median(const std::vector<ExperimentRow>& rows);

/// Stable CSV column set; golden-file tested.
extern const char* const kCsvHeader;

void write_csv(std::ostream& os, Scenario scenario,
               const std::vector<ExperimentRow>& rows);
void write_jsonl(std::ostream& os, const std::vector<ExperimentRow>& rows);

/// Plot data (x, error, eps_ub, eps_berr); x is cond(A) for the vary-cond
/// scenario and the grid value otherwise.
void write_plot_csv(std::ostream& os, Scenario scenario,
                    const std::vector<ExperimentRow>& rows);

}  // namespace jbd

#endif
