#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "consensus_opt/dynamics.hpp"

namespace consensus_opt {

// Every knob of every harness command, flat so it maps 1:1 onto the
// `key = value` config file. Scalar init bounds are broadcast to all
// coordinates.
struct ExperimentConfig {
  Scheme scheme = Scheme::delta_cbo_em;
  std::string objective = "ackley";
  int dim = 5;
  int n_particles = 5000;
  double alpha = 1e15;
  double lambda = 1.0;
  double delta = 1.41;
  double sigma = 0.0;
  double dt = 0.1;
  double speed = 1.0;
  std::optional<double> hopping_variance;

  std::vector<double> dt_grid;
  std::vector<double> delta_grid;
  std::vector<double> s_grid;
  std::vector<std::uint64_t> seeds;

  double epsilon = 0.1;
  int consecutive = 10;
  int max_iterations = 500;
  // Iterations per run in the s-sweep.
  int iterations = 100;

  InitSpec::Kind init_kind = InitSpec::Kind::uniform_box;
  double init_a = 5.0;  // box: lo, gaussian: mean
  double init_b = 7.0;  // box: hi, gaussian: variance

  // fixed-point
  double variance = 0.5;
  std::vector<double> mu0;  // empty or size 1: broadcast 5.0 / the value
  double tol = 0.01;
  int mc_n = 100000;
  int fp_max_iter = 200;

  std::string output;
  int threads = 1;

  SolverParams solver_params() const;
  InitSpec init_spec() const;
  TerminationRule termination(const Vector& target) const;
  Vector mu0_vector() const;

  // Throws std::invalid_argument("<field> must be ...") on a range violation.
  void validate() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// Defaults for a harness command (run, sweep-dt, tune-delta, sweep-s,
// fixed-point). sweep-s and fixed-point use their own problem setups.
ExperimentConfig default_config(std::string_view command);

// Grid syntax: "a:b:Nlog" (N log-spaced points), "a:b:Nlin" (N linear points
// ending at b and starting one spacing above a, i.e. the half-open (a, b]),
// "a:b:Nlinc" (closed [a, b]), or a comma list.
std::vector<double> parse_grid(std::string_view text);

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Applies one key/value pair. Throws ConfigError for unknown keys or
// malformed values.
void apply_config_value(ExperimentConfig& cfg, std::string_view key, std::string_view value);

// Parses `key = value` lines; '#' starts a comment. Errors carry "line N: ".
void load_config_text(ExperimentConfig& cfg, std::string_view text);
ExperimentConfig load_config(const std::string& path, ExperimentConfig base);

// Every key, one `key = value` line each, in a fixed order. Without
// include_runtime the `output` and `threads` keys are left out, which is what
// output preambles use so files do not depend on where or how they were made.
std::string emit_config(const ExperimentConfig& cfg, bool include_runtime = true);

// Shortest representation that parses back to the same double.
std::string format_double(double value);

}  // namespace consensus_opt
