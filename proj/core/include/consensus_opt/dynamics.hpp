#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "consensus_opt/objectives.hpp"
#include "consensus_opt/types.hpp"

namespace consensus_opt {

enum class Scheme { cbo_em, delta_cbo_em, consensus_freezing, consensus_hopping };

// CLI spellings: cbo, delta-cbo, cf, ch.
std::string_view scheme_name(Scheme scheme);
Scheme parse_scheme(std::string_view name);

struct SolverParams {
  double alpha = 1e15;
  double lambda = 1.0;
  double sigma = 0.0;   // multiplicative noise, original CBO only
  double delta = 1.41;  // additive noise
  double dt = 0.1;
  double speed = 1.0;   // time rescaling s
  int n_particles = 5000;
  Scheme scheme = Scheme::delta_cbo_em;
  // Consensus hopping sampling variance; delta^2 / (2 lambda) when unset.
  std::optional<double> hopping_variance;
  int threads = 1;

  double stationary_variance() const { return delta * delta / (2.0 * lambda); }
  double sampling_variance() const { return hopping_variance.value_or(stationary_variance()); }
  // e^{-s lambda dt}
  double omega() const;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct ParticleEnsemble {
  Positions positions;
  std::uint32_t iteration = 0;
  std::uint64_t master_seed = 0;

  Eigen::Index size() const { return positions.rows(); }
  Eigen::Index dim() const { return positions.cols(); }
};

// Raised when a step produces a non-finite coordinate or the ensemble radius
// max_j |x_j| exceeds kDivergenceRadius.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kDivergenceRadius = 1e9;

struct InitSpec {
  enum class Kind { uniform_box, gaussian };
  Kind kind = Kind::uniform_box;
  Vector lo, hi;     // uniform_box
  Vector mean;       // gaussian
  double variance = 1.0;

  static InitSpec box(Vector lo, Vector hi);
  static InitSpec box(double lo, double hi, int dim);
  static InitSpec gaussian(Vector mean, double variance);
  static InitSpec gaussian(double mean, double variance, int dim);

  int dim() const;
  // Per-coordinate variance of the initial law: (hi-lo)^2/12 averaged over
  // coordinates for a box, the variance itself for a Gaussian.
  double coordinate_variance() const;
};

// Particle j draws from StreamKey(seed, j, 0, 0).
ParticleEnsemble initialize_ensemble(const InitSpec& init, int n_particles, std::uint64_t seed,
                                     int threads = 1);

std::vector<double> evaluate(const ParticleEnsemble& ensemble, const Objective& objective,
                             int threads = 1);

// Frozen-consensus updates. Each maps ensemble k to ensemble k+1 using the
// Gaussian draws StreamKey(seed, j, k+1, 0..d-1) for particle j.
ParticleEnsemble cbo_em_update(const ParticleEnsemble& ensemble, const Vector& consensus,
                               const SolverParams& params);
ParticleEnsemble delta_cbo_em_update(const ParticleEnsemble& ensemble, const Vector& consensus,
                                     const SolverParams& params);
// x+ = (1 - omega) c + omega x + sqrt((1 - omega^2) stationary_variance) B
ParticleEnsemble consensus_freezing_update(const ParticleEnsemble& ensemble,
                                           const Vector& consensus, double omega,
                                           double stationary_variance, int threads = 1);
// N fresh samples of N(center, variance I) tagged with the given iteration.
ParticleEnsemble gaussian_cloud(const Vector& center, double variance, int n_particles,
                                std::uint64_t seed, std::uint32_t iteration, int threads = 1);

// Full steps: consensus from the pre-step ensemble, then the update.
ParticleEnsemble step_cbo_em(const ParticleEnsemble& ensemble, const SolverParams& params,
                             const Objective& objective);
ParticleEnsemble step_delta_cbo_em(const ParticleEnsemble& ensemble, const SolverParams& params,
                                   const Objective& objective);
ParticleEnsemble step_consensus_freezing(const ParticleEnsemble& ensemble,
                                         const SolverParams& params, const Objective& objective);
// Samples N(center, sampling_variance I) as iteration ensemble.iteration + 1
// and returns (consensus of the sample, sample).
std::pair<Vector, ParticleEnsemble> step_consensus_hopping(const ParticleEnsemble& ensemble,
                                                           const SolverParams& params,
                                                           const Objective& objective,
                                                           const Vector& center);

struct TerminationRule {
  double epsilon = 0.1;
  int consecutive = 10;
  int max_iterations = 500;
  Vector target;  // empty: never converges
  // When false the run continues to max_iterations after the rule first fires.
  bool stop_on_convergence = true;

  void validate() const;
};

enum class RunStatus { converged, max_iter, diverged };
std::string_view status_name(RunStatus status);

struct IterationRecord {
  int iteration = 0;
  Vector consensus;
  double best_value = 0.0;
  double empirical_variance = 0.0;  // unbiased, averaged over coordinates
  Vector coordinate_variance;
  double distance = 0.0;            // |consensus - target|, NaN without target
};

struct RunTrace {
  std::vector<IterationRecord> records;
  RunStatus status = RunStatus::max_iter;
  // Iteration at which the m-th consecutive hit occurred.
  std::optional<int> converged_at;
  std::string diagnostic;
  std::uint64_t seed = 0;

  int iterations() const { return static_cast<int>(records.size()) - 1; }
  // Variance of the last accepted ensemble; +inf for a diverged run.
  double final_variance() const;
};

using EnsembleObserver = std::function<void(const ParticleEnsemble&, const Vector& consensus)>;

// Runs the selected scheme until the termination rule fires, max_iterations
// steps have been taken, or a step diverges. Record k describes ensemble k, so
// the trace holds iterations() + 1 records. For consensus hopping ensemble 0 is
// the initial cloud and ensemble k+1 is sampled around the consensus of
// ensemble k.
RunTrace run(const SolverParams& params, const Objective& objective, const InitSpec& init,
             const TerminationRule& rule, std::uint64_t seed,
             const EnsembleObserver& observer = {});

}  // namespace consensus_opt
