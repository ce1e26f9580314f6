#include "jbd/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "jbd/alignment.hpp"
#include "jbd/rng.hpp"

namespace jbd {

Scenario scenario_from_string(const std::string& s) {
  if (s == "vary-m") return Scenario::VaryM;
  if (s == "vary-n") return Scenario::VaryN;
  if (s == "vary-t") return Scenario::VaryT;
  if (s == "vary-noise") return Scenario::VaryNoise;
  if (s == "vary-cond") return Scenario::VaryCond;
  if (s == "single") return Scenario::Single;
  throw std::invalid_argument("unknown scenario '" + s + "'");
}

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::VaryM: return "vary-m";
    case Scenario::VaryN: return "vary-n";
    case Scenario::VaryT: return "vary-t";
    case Scenario::VaryNoise: return "vary-noise";
    case Scenario::VaryCond: return "vary-cond";
    case Scenario::Single: return "single";
  }
  return "?";
}

namespace {

std::uint64_t trial_seed(std::uint64_t master, std::size_t grid_index,
                         int trial) {
  return splitmix64(splitmix64(master) ^
                    splitmix64((grid_index << 20) + static_cast<std::uint64_t>(trial)));
}

// Scenario-specific instance parameters for one grid point.
struct PointConfig {
  Partition tau;
  int m;
  double xi;
};

PointConfig point_config(const ExperimentSpec& spec, double x,
                         std::uint64_t seed) {
  std::vector<int> sizes = spec.tau_sizes;
  int m = spec.m;
  double xi = spec.xi;
  switch (spec.scenario) {
    case Scenario::VaryM:
      m = static_cast<int>(x);
      break;
    case Scenario::VaryN: {
      // repeat the base partition p times
      const int p = static_cast<int>(x);
      if (p < 1) throw std::invalid_argument("vary-n: grid values must be >= 1");
      std::vector<int> repeated;
      for (int i = 0; i < p; ++i)
        repeated.insert(repeated.end(), sizes.begin(), sizes.end());
      sizes = std::move(repeated);
      break;
    }
    case Scenario::VaryT: {
      // t blocks with sizes drawn uniformly from {1,...,5}
      const int t = static_cast<int>(x);
      if (t < 2) throw std::invalid_argument("vary-t: grid values must be >= 2");
      Rng rng = Rng::stream(seed, 0xb10c);
      sizes.assign(static_cast<std::size_t>(t), 1);
      for (int& s : sizes) s = 1 + static_cast<int>(rng.below(5));
      break;
    }
    case Scenario::VaryNoise:
      xi = x;
      break;
    case Scenario::VaryCond:
    case Scenario::Single:
      break;
  }
  return {Partition(sizes), m, xi};
}

}  // namespace

std::vector<ExperimentRow> run_experiment(const ExperimentSpec& spec) {
  if (spec.grid.empty()) throw std::invalid_argument("experiment: empty grid");
  if (spec.trials < 1) throw std::invalid_argument("experiment: trials must be >= 1");

  std::vector<ExperimentRow> rows;
  for (std::size_t gi = 0; gi < spec.grid.size(); ++gi) {
    for (int trial = 0; trial < spec.trials; ++trial) {
      const std::uint64_t seed = trial_seed(spec.seed, gi, trial);
      const PointConfig pc = point_config(spec, spec.grid[gi], seed);
      const InstanceBundle bundle = generate(pc.tau, pc.m, pc.xi, seed);

      SolverConfig scfg = spec.solver;
      scfg.seed = splitmix64(seed);
      if (spec.warm_start) scfg.warm_start = bundle.w_true;
      const SolverOutcome outcome = solve(bundle.a_noisy, pc.tau, scfg);

      ExperimentRow row;
      row.x = spec.grid[gi];
      row.trial = trial;
      row.seed = seed;
      row.n = pc.tau.n();
      row.t = pc.tau.t();
      row.m = pc.m;
      row.xi = pc.xi;
      row.solver_converged = outcome.converged;
      row.init_mode = spec.warm_start ? "warm" : "random";
      row.report =
          analyze(bundle.a_clean, bundle.a_noisy, bundle.w_true,
                  outcome.w_tilde, pc.tau, spec.gamma_samples, splitmix64(seed ^ 0x9a77));
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

namespace {

double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

}  // namespace

std::vector<ExperimentRow> aggregate_median(
    const std::vector<ExperimentRow>& rows) {
  std::vector<ExperimentRow> out;
  std::size_t i = 0;
  while (i < rows.size()) {
    std::size_t j = i;
    while (j < rows.size() && rows[j].x == rows[i].x) ++j;

    ExperimentRow agg = rows[i];
    agg.trial = -1;  // aggregate marker
    auto med = [&](auto getter) {
      std::vector<double> v;
      for (std::size_t k = i; k < j; ++k) v.push_back(getter(rows[k]));
      return median_of(v);
    };
    auto med_if = [&](auto getter, auto pred) {
      std::vector<double> v;
      for (std::size_t k = i; k < j; ++k)
        if (pred(rows[k])) v.push_back(getter(rows[k]));
      return median_of(v);
    };
    AnalysisReport& r = agg.report;
    r.omega_uniq = med([](const ExperimentRow& e) { return e.report.omega_uniq; });
    r.omega_robu = med([](const ExperimentRow& e) { return e.report.omega_robu; });
    r.r_tilde = med([](const ExperimentRow& e) { return e.report.r_tilde; });
    r.delta = med([](const ExperimentRow& e) { return e.report.delta; });
    r.ratio = med([](const ExperimentRow& e) { return e.report.ratio; });
    r.eps_berr = med([](const ExperimentRow& e) { return e.report.eps_berr; });
    r.cond_a = med([](const ExperimentRow& e) { return e.report.cond_a; });
    r.align_error = med([](const ExperimentRow& e) { return e.report.align_error; });
    int holds = 0;
    for (std::size_t k = i; k < j; ++k)
      if (rows[k].report.condition_holds) ++holds;
    r.condition_holds = 2 * holds > static_cast<int>(j - i);
    r.eps_ub = r.condition_holds
                   ? med_if([](const ExperimentRow& e) { return e.report.eps_ub; },
                            [](const ExperimentRow& e) { return e.report.condition_holds; })
                   : std::numeric_limits<double>::quiet_NaN();
    int conv = 0;
    for (std::size_t k = i; k < j; ++k)
      if (rows[k].solver_converged) ++conv;
    agg.solver_converged = 2 * conv > static_cast<int>(j - i);

    out.push_back(std::move(agg));
    i = j;
  }
  return out;
}

const char* const kCsvHeader =
    "scenario,x,trial,seed,n,t,m,xi,omega_uniq,omega_robu,delta,ratio,"
    "eps_berr,cond,eps_ub,error,condition_holds,solver_converged,init";

namespace {

std::string fmt(double x) {
  if (std::isnan(x)) return "";  // absent cell
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

void write_csv(std::ostream& os, Scenario scenario,
               const std::vector<ExperimentRow>& rows) {
  os << kCsvHeader << '\n';
  for (const auto& row : rows) {
    const AnalysisReport& r = row.report;
    os << to_string(scenario) << ',';
    os << fmt(row.x) << ',' << row.trial << ',' << row.seed << ',' << row.n
       << ',' << row.t << ',' << row.m << ',' << fmt(row.xi) << ','
       << fmt(r.omega_uniq) << ',' << fmt(r.omega_robu) << ','
       << fmt(r.delta) << ',' << fmt(r.ratio) << ',' << fmt(r.eps_berr) << ','
       << fmt(r.cond_a) << ','
       << (r.condition_holds ? fmt(r.eps_ub) : std::string()) << ','
       << fmt(r.align_error) << ',' << (r.condition_holds ? 1 : 0) << ','
       << (row.solver_converged ? 1 : 0) << ',' << row.init_mode << '\n';
  }
}

void write_jsonl(std::ostream& os, const std::vector<ExperimentRow>& rows) {
  for (const auto& row : rows) {
    const AnalysisReport& r = row.report;
    nlohmann::json j;
    j["x"] = row.x;
    j["trial"] = row.trial;
    j["seed"] = row.seed;
    j["n"] = row.n;
    j["t"] = row.t;
    j["m"] = row.m;
    j["xi"] = row.xi;
    j["solver_converged"] = row.solver_converged;
    j["init"] = row.init_mode;
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
    os << j.dump() << '\n';
  }
}

void write_plot_csv(std::ostream& os, Scenario scenario,
                    const std::vector<ExperimentRow>& rows) {
  os << "x,error,eps_ub,eps_berr\n";
  for (const auto& row : rows) {
    const double x =
        scenario == Scenario::VaryCond ? row.report.cond_a : row.x;
    os << fmt(x) << ',' << fmt(row.report.align_error) << ','
       << (row.report.condition_holds ? fmt(row.report.eps_ub) : std::string())
       << ',' << fmt(row.report.eps_berr) << '\n';
  }
}

}  // namespace jbd
