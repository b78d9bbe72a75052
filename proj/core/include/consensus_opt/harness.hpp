#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "consensus_opt/config.hpp"
#include "consensus_opt/dynamics.hpp"
#include "consensus_opt/meanfield.hpp"

namespace consensus_opt {

// One (scheme, parameter) cell of a sweep, aggregated over the seed list.
struct SweepRow {
  Scheme scheme = Scheme::delta_cbo_em;
  double parameter = 0.0;          // dt, delta or s
  int runs = 0;
  int converged_runs = 0;
  // False as soon as one seed misses the termination rule.
  bool converged = false;
  // Mean iterations to termination over the converged seeds; NaN if none.
  double mean_iterations = 0.0;
  // Same, but counting a failed seed as max_iterations + 1.
  double censored_mean_iterations = 0.0;
  // Seed-averaged unbiased variance after the last iteration (+inf if any
  // seed diverged), its OU prediction and the relative gap.
  double final_variance = 0.0;
  double theoretical_variance = 0.0;
  double relative_error = 0.0;
  // s-sweep only: W2 between CF and CH clouds, seed-averaged.
  double summed_w2 = 0.0;
  double mean_w2 = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::optional<double> best_parameter;  // tune-delta only
};

// Both delta-CBO (Euler-Maruyama) and CF over cfg.dt_grid. Each run lasts
// exactly max_iterations steps so the final variance is taken at a common
// horizon; the termination rule is tracked on the way.
SweepResult cmd_sweep_dt(const ExperimentConfig& cfg);

// delta-CBO over cfg.delta_grid at cfg.dt, stopping at termination.
SweepResult cmd_tune_delta(const ExperimentConfig& cfg);

// CF at each s in cfg.s_grid against CH, both started from the same Gaussian
// cloud N(x0, sampling variance) with matched noise streams, for
// cfg.iterations steps.
SweepResult cmd_sweep_s(const ExperimentConfig& cfg);

// Single run of cfg.scheme on cfg.seeds.front(); target is the objective's
// minimizer when known.
RunTrace cmd_run(const ExperimentConfig& cfg);

FixedPointReport cmd_fixed_point(const ExperimentConfig& cfg);

// Per-iteration W2 between two recorded cloud sequences, k = 0..K.
std::vector<double> cloud_w2_series(const std::vector<Positions>& a, const std::vector<Positions>& b);

// Comment preamble ("# " lines: command, every parameter, seed list).
void write_preamble(std::ostream& out, std::string_view command, const ExperimentConfig& cfg);

// trace.csv: iter, consensus_0..consensus_{d-1}, best_f, emp_var_mean,
// dist_to_xstar, status. Status is "running" on all rows but the last.
void write_trace_csv(std::ostream& out, const ExperimentConfig& cfg, const RunTrace& trace);

void write_sweep_csv(std::ostream& out, std::string_view command, const ExperimentConfig& cfg,
                     const SweepResult& result);

// Creates parent directories of path as needed; throws std::runtime_error on
// failure.
void prepare_output_path(const std::string& path);

}  // namespace consensus_opt
