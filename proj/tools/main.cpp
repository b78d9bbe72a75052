// consensus-opt: command-line driver for single runs, parameter sweeps and
// mean-field fixed-point probes.

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "consensus_opt/config.hpp"
#include "consensus_opt/harness.hpp"

namespace {

using namespace consensus_opt;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

struct Overrides {
  // config key -> raw value, applied in key order after the config file.
  std::map<std::string, std::string> values;
  std::string seed;
  std::string init_box;
  std::string init_gauss;
};

void add_option(CLI::App* app, Overrides& o, const std::string& flag, const std::string& key,
                const std::string& help) {
  app->add_option(flag, o.values[key], help);
}

void add_solver_options(CLI::App* cmd, Overrides& o) {
  add_option(cmd, o, "--scheme", "scheme", "cbo | delta-cbo | cf | ch");
  add_option(cmd, o, "--objective", "objective", "ackley | quadratic | rastrigin | trap1d");
  add_option(cmd, o, "--dim", "dim", "problem dimension d");
  add_option(cmd, o, "--n", "n_particles", "number of particles N");
  add_option(cmd, o, "--alpha", "alpha", "Laplace weight alpha");
  add_option(cmd, o, "--lambda", "lambda", "drift rate lambda");
  add_option(cmd, o, "--delta", "delta", "additive noise delta");
  add_option(cmd, o, "--sigma", "sigma", "multiplicative noise sigma (original CBO)");
  add_option(cmd, o, "--dt", "dt", "time step");
  add_option(cmd, o, "--speed", "speed", "CF speed parameter s");
  add_option(cmd, o, "--hopping-variance", "hopping_variance",
             "CH sampling variance (default delta^2/(2 lambda))");
  add_option(cmd, o, "--seeds", "seeds", "comma-separated seed list");
  add_option(cmd, o, "--eps", "epsilon", "termination radius epsilon");
  add_option(cmd, o, "--consec", "consecutive", "consecutive hits m");
  add_option(cmd, o, "--max-iter", "max_iterations", "iteration cap");
  cmd->add_option("--init-box", o.init_box, "uniform box lo,hi");
  cmd->add_option("--init-gauss", o.init_gauss, "gaussian mean,var");
}

ExperimentConfig build_config(const std::string& command, const std::string& config_path,
                              const Overrides& o) {
  ExperimentConfig cfg = default_config(command);
  if (!config_path.empty()) cfg = load_config(config_path, cfg);
  for (const auto& [key, value] : o.values) {
    if (!value.empty()) apply_config_value(cfg, key, value);
  }
  if (!o.init_box.empty()) apply_config_value(cfg, "init", "box:" + o.init_box);
  if (!o.init_gauss.empty()) apply_config_value(cfg, "init", "gauss:" + o.init_gauss);
  if (!o.seed.empty()) {
    // A base seed expands to as many consecutive seeds as the list holds.
    const std::uint64_t base = std::stoull(o.seed);
    const std::size_t count = std::max<std::size_t>(1, cfg.seeds.size());
    cfg.seeds.clear();
    for (std::size_t i = 0; i < count; ++i) cfg.seeds.push_back(base + i);
  }
  cfg.validate();
  return cfg;
}

template <typename Writer>
void emit(const std::string& path, Writer&& writer) {
  if (path.empty()) {
    writer(std::cout);
    return;
  }
  prepare_output_path(path);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
  writer(out);
}

nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

nlohmann::ordered_json fixed_point_json(const ExperimentConfig& cfg, const FixedPointReport& report) {
  nlohmann::ordered_json j;
  nlohmann::json point = nlohmann::json::array();
  for (Eigen::Index k = 0; k < report.fixed_point.size(); ++k) point.push_back(report.fixed_point[k]);
  j["objective"] = cfg.objective;
  j["dim"] = cfg.dim;
  j["alpha"] = cfg.alpha;
  j["variance"] = cfg.variance;
  j["mc_n"] = cfg.mc_n;
  j["tol"] = cfg.tol;
  j["seed"] = cfg.seeds.front();
  j["fixed_point"] = point;
  j["iterations"] = report.iterations;
  j["residual"] = number_or_null(report.residual);
  j["estimated_contraction"] = number_or_null(report.estimated_contraction);
  j["contraction_flag"] = report.contraction_flag;
  j["converged"] = report.converged;
  j["status"] = report.converged ? "converged" : "no convergence";
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Consensus-based optimization: runs, sweeps and mean-field probes"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_path, threads;
  Overrides overrides;
  app.add_option("--config", config_path, "key = value config file");
  app.add_option("--seed", overrides.seed, "base seed (expands to the configured seed count)");
  app.add_option("--threads", threads, "worker threads");
  app.add_option("--out", out_path, "output file (stdout when omitted)");

  auto* run_cmd = app.add_subcommand("run", "single run, writes trace.csv");
  auto* sweep_dt = app.add_subcommand("sweep-dt", "delta-CBO vs CF over the dt grid");
  auto* tune_delta = app.add_subcommand("tune-delta", "delta-CBO over the delta grid");
  auto* sweep_s = app.add_subcommand("sweep-s", "CF vs CH over the speed grid");
  auto* fixed_point = app.add_subcommand("fixed-point", "fixed point of the mean-field map");

  for (auto* cmd : {run_cmd, sweep_dt, tune_delta, sweep_s, fixed_point}) {
    add_solver_options(cmd, overrides);
  }
  add_option(sweep_dt, overrides, "--dt-grid", "dt_grid", "grid, e.g. 1e-2:1e2:20log");
  add_option(tune_delta, overrides, "--delta-grid", "delta_grid", "grid, e.g. 0:2:20lin");
  add_option(sweep_s, overrides, "--s-grid", "s_grid", "grid, e.g. 1e-1:1e3:17log");
  add_option(sweep_s, overrides, "--iterations", "iterations", "iterations per run");
  add_option(fixed_point, overrides, "--variance", "variance", "Gaussian variance");
  add_option(fixed_point, overrides, "--mu0", "mu0", "start point (comma list or scalar)");
  add_option(fixed_point, overrides, "--tol", "tol", "residual tolerance");
  add_option(fixed_point, overrides, "--mc-n", "mc_n", "Monte Carlo samples");
  add_option(fixed_point, overrides, "--fp-max-iter", "fp_max_iter", "iteration cap");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  CLI::App* chosen = app.get_subcommands().front();
  const std::string command = chosen->get_name();
  if (!out_path.empty()) overrides.values["output"] = out_path;
  if (!threads.empty()) overrides.values["threads"] = threads;

  ExperimentConfig cfg;
  try {
    cfg = build_config(command, config_path, overrides);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (command == "run") {
      const RunTrace trace = cmd_run(cfg);
      emit(cfg.output, [&](std::ostream& out) { write_trace_csv(out, cfg, trace); });
      if (trace.status == RunStatus::diverged) {
        std::cerr << "diverged: " << trace.diagnostic << '\n';
        return kExitRuntime;
      }
    } else if (command == "sweep-dt") {
      const auto result = cmd_sweep_dt(cfg);
      emit(cfg.output, [&](std::ostream& out) { write_sweep_csv(out, command, cfg, result); });
    } else if (command == "tune-delta") {
      const auto result = cmd_tune_delta(cfg);
      emit(cfg.output, [&](std::ostream& out) { write_sweep_csv(out, command, cfg, result); });
    } else if (command == "sweep-s") {
      const auto result = cmd_sweep_s(cfg);
      emit(cfg.output, [&](std::ostream& out) { write_sweep_csv(out, command, cfg, result); });
    } else if (command == "fixed-point") {
      const auto report = cmd_fixed_point(cfg);
      emit(cfg.output, [&](std::ostream& out) { out << fixed_point_json(cfg, report).dump(2) << '\n'; });
      if (!report.converged) return kExitRuntime;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}
