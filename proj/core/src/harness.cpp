#include "consensus_opt/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "consensus_opt/metrics.hpp"
#include "consensus_opt/parallel.hpp"

namespace consensus_opt {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct CellOutcome {
  std::optional<int> converged_at;
  double final_variance = 0.0;
  bool diverged = false;
};

Vector objective_target(const Objective& objective) {
  return objective.minimizer().value_or(Vector());
}

// Aggregates the seed outcomes of one sweep cell.
SweepRow summarize(Scheme scheme, double parameter, const std::vector<CellOutcome>& outcomes,
                   int max_iterations) {
  SweepRow row;
  row.scheme = scheme;
  row.parameter = parameter;
  row.runs = static_cast<int>(outcomes.size());
  double iter_sum = 0.0, censored_sum = 0.0, var_sum = 0.0;
  bool any_diverged = false;
  for (const auto& o : outcomes) {
    if (o.converged_at) {
      ++row.converged_runs;
      iter_sum += *o.converged_at;
      censored_sum += *o.converged_at;
    } else {
      censored_sum += max_iterations + 1;
    }
    any_diverged = any_diverged || o.diverged;
    var_sum += o.final_variance;
  }
  row.converged = row.converged_runs == row.runs;
  row.mean_iterations = row.converged_runs > 0 ? iter_sum / row.converged_runs : kNaN;
  row.censored_mean_iterations = censored_sum / row.runs;
  row.final_variance = any_diverged ? std::numeric_limits<double>::infinity() : var_sum / row.runs;
  row.summed_w2 = kNaN;
  row.mean_w2 = kNaN;
  return row;
}

void sort_rows(std::vector<SweepRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    if (a.scheme != b.scheme) return a.scheme < b.scheme;
    return a.parameter < b.parameter;
  });
}

std::string csv_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return format_double(v);
}

}  // namespace

SweepResult cmd_sweep_dt(const ExperimentConfig& cfg) {
  cfg.validate();
  const Objective objective = make_objective(cfg.objective, cfg.dim);
  const InitSpec init = cfg.init_spec();
  TerminationRule rule = cfg.termination(objective_target(objective));
  rule.stop_on_convergence = false;

  const std::vector<Scheme> schemes = {Scheme::delta_cbo_em, Scheme::consensus_freezing};
  const std::size_t n_dt = cfg.dt_grid.size(), n_seed = cfg.seeds.size();
  std::vector<CellOutcome> outcomes(schemes.size() * n_dt * n_seed);

  parallel_for(outcomes.size(), cfg.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t cell = begin; cell < end; ++cell) {
      const std::size_t s = cell / (n_dt * n_seed);
      const std::size_t g = (cell / n_seed) % n_dt;
      const std::size_t r = cell % n_seed;
      SolverParams params = cfg.solver_params();
      params.scheme = schemes[s];
      params.dt = cfg.dt_grid[g];
      params.threads = 1;
      const RunTrace trace = run(params, objective, init, rule, cfg.seeds[r]);
      outcomes[cell] = {trace.converged_at, trace.final_variance(),
                        trace.status == RunStatus::diverged};
    }
  });

  SweepResult result;
  const double var0 = init.coordinate_variance();
  for (std::size_t s = 0; s < schemes.size(); ++s) {
    for (std::size_t g = 0; g < n_dt; ++g) {
      const auto first = outcomes.begin() + static_cast<std::ptrdiff_t>((s * n_dt + g) * n_seed);
      SweepRow row = summarize(schemes[s], cfg.dt_grid[g], {first, first + static_cast<std::ptrdiff_t>(n_seed)},
                               cfg.max_iterations);
      // CF runs its OU dynamics at speed s; Euler-Maruyama has no speed knob.
      const double speed = schemes[s] == Scheme::consensus_freezing ? cfg.speed : 1.0;
      row.theoretical_variance = expected_ou_variance(
          var0, cfg.lambda, cfg.delta, speed * cfg.max_iterations * cfg.dt_grid[g]);
      row.relative_error =
          std::abs(row.final_variance - row.theoretical_variance) / row.theoretical_variance;
      result.rows.push_back(row);
    }
  }
  sort_rows(result.rows);
  return result;
}

SweepResult cmd_tune_delta(const ExperimentConfig& cfg) {
  cfg.validate();
  const Objective objective = make_objective(cfg.objective, cfg.dim);
  const InitSpec init = cfg.init_spec();
  const TerminationRule rule = cfg.termination(objective_target(objective));

  const std::size_t n_delta = cfg.delta_grid.size(), n_seed = cfg.seeds.size();
  std::vector<CellOutcome> outcomes(n_delta * n_seed);
  parallel_for(outcomes.size(), cfg.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t cell = begin; cell < end; ++cell) {
      SolverParams params = cfg.solver_params();
      params.scheme = Scheme::delta_cbo_em;
      params.delta = cfg.delta_grid[cell / n_seed];
      params.threads = 1;
      const RunTrace trace = run(params, objective, init, rule, cfg.seeds[cell % n_seed]);
      outcomes[cell] = {trace.converged_at, trace.final_variance(),
                        trace.status == RunStatus::diverged};
    }
  });

  SweepResult result;
  for (std::size_t g = 0; g < n_delta; ++g) {
    const auto first = outcomes.begin() + static_cast<std::ptrdiff_t>(g * n_seed);
    SweepRow row = summarize(Scheme::delta_cbo_em, cfg.delta_grid[g],
                             {first, first + static_cast<std::ptrdiff_t>(n_seed)}, cfg.max_iterations);
    row.theoretical_variance = kNaN;
    row.relative_error = kNaN;
    result.rows.push_back(row);
  }
  sort_rows(result.rows);

  // Fewest iterations among fully convergent deltas; without any, fall back
  // to the censored mean.
  const SweepRow* best = nullptr;
  for (const auto& row : result.rows) {
    if (!row.converged) continue;
    if (!best || row.mean_iterations < best->mean_iterations) best = &row;
  }
  if (!best) {
    for (const auto& row : result.rows) {
      if (!best || row.censored_mean_iterations < best->censored_mean_iterations) best = &row;
    }
  }
  if (best) result.best_parameter = best->parameter;
  return result;
}

std::vector<double> cloud_w2_series(const std::vector<Positions>& a, const std::vector<Positions>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("cloud sequences differ in length");
  std::vector<double> series(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) series[k] = empirical_w2(a[k], b[k]);
  return series;
}

SweepResult cmd_sweep_s(const ExperimentConfig& cfg) {
  cfg.validate();
  const Objective objective = make_objective(cfg.objective, cfg.dim);
  TerminationRule rule;
  rule.max_iterations = cfg.iterations;  // no target: fixed-length runs

  SolverParams hopping = cfg.solver_params();
  hopping.scheme = Scheme::consensus_hopping;
  hopping.threads = 1;
  const double sampling_variance = hopping.sampling_variance();
  const Vector x0 = cfg.init_kind == InitSpec::Kind::gaussian ? Vector::Constant(cfg.dim, cfg.init_a)
                                                              : cfg.mu0_vector();
  const InitSpec init = InitSpec::gaussian(x0, sampling_variance);

  auto record_clouds = [&](const SolverParams& params, std::uint64_t seed) {
    std::vector<Positions> clouds;
    run(params, objective, init, rule, seed,
        [&](const ParticleEnsemble& ensemble, const Vector&) { clouds.push_back(ensemble.positions); });
    return clouds;
  };

  const std::size_t n_s = cfg.s_grid.size(), n_seed = cfg.seeds.size();
  std::vector<std::vector<Positions>> hopping_clouds(n_seed);
  parallel_for(n_seed, cfg.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) hopping_clouds[r] = record_clouds(hopping, cfg.seeds[r]);
  });

  std::vector<std::vector<double>> series(n_s * n_seed);
  parallel_for(series.size(), cfg.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t cell = begin; cell < end; ++cell) {
      SolverParams freezing = cfg.solver_params();
      freezing.scheme = Scheme::consensus_freezing;
      freezing.speed = cfg.s_grid[cell / n_seed];
      freezing.threads = 1;
      const std::size_t r = cell % n_seed;
      series[cell] = cloud_w2_series(record_clouds(freezing, cfg.seeds[r]), hopping_clouds[r]);
    }
  });

  SweepResult result;
  for (std::size_t g = 0; g < n_s; ++g) {
    SweepRow row;
    row.scheme = Scheme::consensus_freezing;
    row.parameter = cfg.s_grid[g];
    row.runs = static_cast<int>(n_seed);
    row.mean_iterations = row.censored_mean_iterations = kNaN;
    row.final_variance = row.theoretical_variance = row.relative_error = kNaN;
    double summed = 0.0, mean = 0.0;
    for (std::size_t r = 0; r < n_seed; ++r) {
      const auto& w2 = series[g * n_seed + r];
      double total = 0.0;
      for (double v : w2) total += v;
      summed += total;
      // Record 0 compares the identical starting clouds, so the per-iteration
      // mean is over the cfg.iterations steps.
      mean += cfg.iterations > 0 ? total / cfg.iterations : total;
    }
    row.summed_w2 = summed / static_cast<double>(n_seed);
    row.mean_w2 = mean / static_cast<double>(n_seed);
    result.rows.push_back(row);
  }
  sort_rows(result.rows);
  return result;
}

RunTrace cmd_run(const ExperimentConfig& cfg) {
  cfg.validate();
  const Objective objective = make_objective(cfg.objective, cfg.dim);
  return run(cfg.solver_params(), objective, cfg.init_spec(),
             cfg.termination(objective_target(objective)), cfg.seeds.front());
}

FixedPointReport cmd_fixed_point(const ExperimentConfig& cfg) {
  cfg.validate();
  const Objective objective = make_objective(cfg.objective, cfg.dim);
  return fixed_point_solve(cfg.mu0_vector(), cfg.variance, cfg.alpha, objective, cfg.tol,
                           cfg.fp_max_iter, cfg.mc_n, cfg.seeds.front(), cfg.threads);
}

void write_preamble(std::ostream& out, std::string_view command, const ExperimentConfig& cfg) {
  out << "# consensus-opt " << command << '\n';
  std::string body = emit_config(cfg, false);
  std::size_t start = 0;
  while (start < body.size()) {
    const auto end = body.find('\n', start);
    out << "# " << body.substr(start, end - start) << '\n';
    start = end + 1;
  }
}

void write_trace_csv(std::ostream& out, const ExperimentConfig& cfg, const RunTrace& trace) {
  write_preamble(out, "run", cfg);
  out << "# seed = " << trace.seed << '\n';
  if (!trace.diagnostic.empty()) out << "# diagnostic = " << trace.diagnostic << '\n';
  out << "iter";
  for (int k = 0; k < cfg.dim; ++k) out << ",consensus_" << k;
  out << ",best_f,emp_var_mean,dist_to_xstar,status\n";
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const auto& rec = trace.records[i];
    out << rec.iteration;
    for (Eigen::Index k = 0; k < rec.consensus.size(); ++k) out << ',' << csv_double(rec.consensus[k]);
    out << ',' << csv_double(rec.best_value) << ',' << csv_double(rec.empirical_variance) << ','
        << csv_double(rec.distance) << ','
        << (i + 1 == trace.records.size() ? status_name(trace.status) : std::string_view("running"))
        << '\n';
  }
}

void write_sweep_csv(std::ostream& out, std::string_view command, const ExperimentConfig& cfg,
                     const SweepResult& result) {
  write_preamble(out, command, cfg);
  if (result.best_parameter) out << "# best_parameter = " << csv_double(*result.best_parameter) << '\n';
  out << "scheme,parameter,runs,converged_runs,converged,mean_iterations,censored_mean_iterations,"
         "final_variance,theoretical_variance,relative_error,summed_w2,mean_w2\n";
  for (const auto& row : result.rows) {
    out << scheme_name(row.scheme) << ',' << csv_double(row.parameter) << ',' << row.runs << ','
        << row.converged_runs << ',' << (row.converged ? 1 : 0) << ','
        << csv_double(row.mean_iterations) << ',' << csv_double(row.censored_mean_iterations) << ','
        << csv_double(row.final_variance) << ',' << csv_double(row.theoretical_variance) << ','
        << csv_double(row.relative_error) << ',' << csv_double(row.summed_w2) << ','
        << csv_double(row.mean_w2) << '\n';
  }
}

void prepare_output_path(const std::string& path) {
  const std::filesystem::path parent = std::filesystem::path(path).parent_path();
  if (parent.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(parent, ec);
  if (ec) {
    throw std::runtime_error("cannot create output directory '" + parent.string() + "': " + ec.message());
  }
}

}  // namespace consensus_opt
