#include "consensus_opt/dynamics.hpp"

#include <cmath>
#include <limits>

#include "consensus_opt/consensus.hpp"
#include "consensus_opt/metrics.hpp"
#include "consensus_opt/parallel.hpp"
#include "consensus_opt/sampling.hpp"

namespace consensus_opt {
namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

void require_consensus_dim(const ParticleEnsemble& ensemble, const Vector& consensus) {
  if (consensus.size() != ensemble.dim()) {
    throw std::invalid_argument("consensus dimension does not match ensemble dimension");
  }
}

void check_divergence(const ParticleEnsemble& ensemble) {
  double max_sq = 0.0;
  for (Eigen::Index j = 0; j < ensemble.size(); ++j) {
    const double sq = ensemble.positions.row(j).squaredNorm();
    if (!std::isfinite(sq)) {
      throw DivergenceError("non-finite coordinate in particle " + std::to_string(j) +
                            " at iteration " + std::to_string(ensemble.iteration));
    }
    max_sq = std::max(max_sq, sq);
  }
  if (max_sq > kDivergenceRadius * kDivergenceRadius) {
    throw DivergenceError("ensemble radius " + std::to_string(std::sqrt(max_sq)) +
                          " exceeds divergence threshold at iteration " +
                          std::to_string(ensemble.iteration));
  }
}

// Shared skeleton of the particle-wise updates: x+_j = update(x_j, B_j).
template <typename Update>
ParticleEnsemble noisy_update(const ParticleEnsemble& ensemble, int threads, Update&& update) {
  ParticleEnsemble next;
  next.positions.resize(ensemble.size(), ensemble.dim());
  next.iteration = ensemble.iteration + 1;
  next.master_seed = ensemble.master_seed;
  const auto d = static_cast<std::size_t>(ensemble.dim());
  parallel_for(static_cast<std::size_t>(ensemble.size()), threads,
               [&](std::size_t begin, std::size_t end) {
                 std::vector<double> noise(d);
                 for (std::size_t j = begin; j < end; ++j) {
                   gaussian_fill({ensemble.master_seed, static_cast<std::uint32_t>(j),
                                  next.iteration, 0},
                                 noise);
                   update(row_span(ensemble.positions, static_cast<Eigen::Index>(j)),
                          std::span<const double>(noise),
                          row_span(next.positions, static_cast<Eigen::Index>(j)));
                 }
               });
  check_divergence(next);
  return next;
}

Vector consensus_of(const ParticleEnsemble& ensemble, const SolverParams& params,
                    const Objective& objective) {
  const auto values = evaluate(ensemble, objective, params.threads);
  return consensus_point(ensemble.positions, values, params.alpha);
}

}  // namespace

std::string_view scheme_name(Scheme scheme) {
  switch (scheme) {
    case Scheme::cbo_em: return "cbo";
    case Scheme::delta_cbo_em: return "delta-cbo";
    case Scheme::consensus_freezing: return "cf";
    case Scheme::consensus_hopping: return "ch";
  }
  return "unknown";
}

Scheme parse_scheme(std::string_view name) {
  for (Scheme s : {Scheme::cbo_em, Scheme::delta_cbo_em, Scheme::consensus_freezing,
                   Scheme::consensus_hopping}) {
    if (name == scheme_name(s)) return s;
  }
  throw std::invalid_argument("unknown scheme '" + std::string(name) +
                              "' (known: cbo, delta-cbo, cf, ch)");
}

double SolverParams::omega() const { return std::exp(-speed * lambda * dt); }

void SolverParams::validate() const {
  require(std::isfinite(alpha) && alpha >= 0.0, "alpha must be >= 0");
  require(std::isfinite(lambda) && lambda > 0.0, "lambda must be > 0");
  require(std::isfinite(sigma) && sigma >= 0.0, "sigma must be >= 0");
  require(std::isfinite(delta) && delta >= 0.0, "delta must be >= 0");
  require(std::isfinite(dt) && dt > 0.0, "dt must be > 0");
  require(std::isfinite(speed) && speed > 0.0, "speed must be > 0");
  require(n_particles >= 2, "n_particles must be >= 2");
  require(threads >= 1, "threads must be >= 1");
  if (hopping_variance) {
    require(std::isfinite(*hopping_variance) && *hopping_variance > 0.0,
            "hopping_variance must be > 0");
  }
  if (scheme == Scheme::consensus_hopping) {
    require(sampling_variance() > 0.0, "consensus hopping needs a positive sampling variance");
  }
}

InitSpec InitSpec::box(Vector lo, Vector hi) {
  require(lo.size() == hi.size() && lo.size() > 0, "box bounds must have equal, positive dimension");
  require(((hi - lo).array() > 0.0).all(), "box lower bound must be below upper bound");
  InitSpec spec;
  spec.kind = Kind::uniform_box;
  spec.lo = std::move(lo);
  spec.hi = std::move(hi);
  return spec;
}

InitSpec InitSpec::box(double lo, double hi, int dim) {
  return box(Vector::Constant(dim, lo), Vector::Constant(dim, hi));
}

InitSpec InitSpec::gaussian(Vector mean, double variance) {
  require(mean.size() > 0, "gaussian mean must be non-empty");
  require(std::isfinite(variance) && variance > 0.0, "gaussian variance must be > 0");
  InitSpec spec;
  spec.kind = Kind::gaussian;
  spec.mean = std::move(mean);
  spec.variance = variance;
  return spec;
}

InitSpec InitSpec::gaussian(double mean, double variance, int dim) {
  return gaussian(Vector::Constant(dim, mean), variance);
}

int InitSpec::dim() const {
  return static_cast<int>(kind == Kind::uniform_box ? lo.size() : mean.size());
}

double InitSpec::coordinate_variance() const {
  if (kind == Kind::gaussian) return variance;
  return ((hi - lo).array().square() / 12.0).mean();
}

ParticleEnsemble initialize_ensemble(const InitSpec& init, int n_particles, std::uint64_t seed,
                                     int threads) {
  require(n_particles >= 1, "n_particles must be >= 1");
  const int d = init.dim();
  ParticleEnsemble ensemble;
  ensemble.positions.resize(n_particles, d);
  ensemble.iteration = 0;
  ensemble.master_seed = seed;
  const double scale = std::sqrt(init.variance);
  parallel_for(static_cast<std::size_t>(n_particles), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      const StreamKey key{seed, static_cast<std::uint32_t>(j), 0, 0};
      const auto row = static_cast<Eigen::Index>(j);
      if (init.kind == InitSpec::Kind::uniform_box) {
        ensemble.positions.row(row) = uniform_box_draw(key, init.lo, init.hi).transpose();
      } else {
        auto out = row_span(ensemble.positions, row);
        gaussian_fill(key, out);
        for (int k = 0; k < d; ++k) out[k] = init.mean[k] + scale * out[k];
      }
    }
  });
  return ensemble;
}

std::vector<double> evaluate(const ParticleEnsemble& ensemble, const Objective& objective,
                             int threads) {
  std::vector<double> values(static_cast<std::size_t>(ensemble.size()));
  parallel_for(values.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      values[j] = objective(row_span(ensemble.positions, static_cast<Eigen::Index>(j)));
    }
  });
  return values;
}

ParticleEnsemble cbo_em_update(const ParticleEnsemble& ensemble, const Vector& consensus,
                               const SolverParams& params) {
  require_consensus_dim(ensemble, consensus);
  const double drift = params.lambda * params.dt;
  const double diffusion = std::sqrt(params.dt) * params.sigma;
  const auto d = static_cast<std::size_t>(ensemble.dim());
  return noisy_update(ensemble, params.threads,
                      [&](std::span<const double> x, std::span<const double> noise, std::span<double> out) {
                        double dist_sq = 0.0;
                        for (std::size_t k = 0; k < d; ++k) {
                          const double gap = x[k] - consensus[static_cast<Eigen::Index>(k)];
                          dist_sq += gap * gap;
                        }
                        const double amplitude = diffusion * std::sqrt(dist_sq);
                        for (std::size_t k = 0; k < d; ++k) {
                          const double gap = x[k] - consensus[static_cast<Eigen::Index>(k)];
                          out[k] = x[k] - drift * gap + amplitude * noise[k];
                        }
                      });
}

ParticleEnsemble delta_cbo_em_update(const ParticleEnsemble& ensemble, const Vector& consensus,
                                     const SolverParams& params) {
  require_consensus_dim(ensemble, consensus);
  const double drift = params.lambda * params.dt;
  const double diffusion = std::sqrt(params.dt) * params.delta;
  const auto d = static_cast<std::size_t>(ensemble.dim());
  return noisy_update(ensemble, params.threads,
                      [&](std::span<const double> x, std::span<const double> noise, std::span<double> out) {
                        for (std::size_t k = 0; k < d; ++k) {
                          out[k] = x[k] - drift * (x[k] - consensus[static_cast<Eigen::Index>(k)]) +
                                   diffusion * noise[k];
                        }
                      });
}

ParticleEnsemble consensus_freezing_update(const ParticleEnsemble& ensemble,
                                           const Vector& consensus, double omega,
                                           double stationary_variance, int threads) {
  require_consensus_dim(ensemble, consensus);
  require(omega >= 0.0 && omega <= 1.0, "omega must lie in [0, 1]");
  require(stationary_variance >= 0.0, "stationary variance must be >= 0");
  const double scale = std::sqrt((1.0 - omega * omega) * stationary_variance);
  const auto d = static_cast<std::size_t>(ensemble.dim());
  return noisy_update(ensemble, threads,
                      [&](std::span<const double> x, std::span<const double> noise, std::span<double> out) {
                        for (std::size_t k = 0; k < d; ++k) {
                          out[k] = (1.0 - omega) * consensus[static_cast<Eigen::Index>(k)] +
                                   omega * x[k] + scale * noise[k];
                        }
                      });
}

ParticleEnsemble gaussian_cloud(const Vector& center, double variance, int n_particles,
                                std::uint64_t seed, std::uint32_t iteration, int threads) {
  require(n_particles >= 1, "n_particles must be >= 1");
  require(variance > 0.0, "sampling variance must be > 0");
  ParticleEnsemble cloud;
  cloud.positions.resize(n_particles, center.size());
  cloud.iteration = iteration;
  cloud.master_seed = seed;
  const double scale = std::sqrt(variance);
  const auto d = center.size();
  parallel_for(static_cast<std::size_t>(n_particles), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      auto out = row_span(cloud.positions, static_cast<Eigen::Index>(j));
      gaussian_fill({seed, static_cast<std::uint32_t>(j), iteration, 0}, out);
      for (Eigen::Index k = 0; k < d; ++k) out[k] = center[k] + scale * out[k];
    }
  });
  check_divergence(cloud);
  return cloud;
}

ParticleEnsemble step_cbo_em(const ParticleEnsemble& ensemble, const SolverParams& params,
                             const Objective& objective) {
  return cbo_em_update(ensemble, consensus_of(ensemble, params, objective), params);
}

ParticleEnsemble step_delta_cbo_em(const ParticleEnsemble& ensemble, const SolverParams& params,
                                   const Objective& objective) {
  return delta_cbo_em_update(ensemble, consensus_of(ensemble, params, objective), params);
}

ParticleEnsemble step_consensus_freezing(const ParticleEnsemble& ensemble,
                                         const SolverParams& params, const Objective& objective) {
  require(params.lambda > 0.0, "lambda must be > 0");
  return consensus_freezing_update(ensemble, consensus_of(ensemble, params, objective),
                                   params.omega(), params.stationary_variance(), params.threads);
}

std::pair<Vector, ParticleEnsemble> step_consensus_hopping(const ParticleEnsemble& ensemble,
                                                           const SolverParams& params,
                                                           const Objective& objective,
                                                           const Vector& center) {
  ParticleEnsemble cloud =
      gaussian_cloud(center, params.sampling_variance(), params.n_particles,
                     ensemble.master_seed, ensemble.iteration + 1, params.threads);
  Vector next_center = consensus_of(cloud, params, objective);
  return {std::move(next_center), std::move(cloud)};
}

void TerminationRule::validate() const {
  require(std::isfinite(epsilon) && epsilon > 0.0, "epsilon must be > 0");
  require(consecutive >= 1, "consecutive must be >= 1");
  require(max_iterations >= 0, "max_iterations must be >= 0");
}

std::string_view status_name(RunStatus status) {
  switch (status) {
    case RunStatus::converged: return "converged";
    case RunStatus::max_iter: return "max_iter";
    case RunStatus::diverged: return "diverged";
  }
  return "unknown";
}

double RunTrace::final_variance() const {
  if (status == RunStatus::diverged || records.empty()) {
    return std::numeric_limits<double>::infinity();
  }
  return records.back().empirical_variance;
}

RunTrace run(const SolverParams& params, const Objective& objective, const InitSpec& init,
             const TerminationRule& rule, std::uint64_t seed, const EnsembleObserver& observer) {
  params.validate();
  rule.validate();
  require(init.dim() == objective.dim(), "initial distribution dimension does not match objective");
  require(rule.target.size() == 0 || rule.target.size() == objective.dim(),
          "termination target dimension does not match objective");

  RunTrace trace;
  trace.seed = seed;
  trace.status = RunStatus::max_iter;
  ParticleEnsemble ensemble = initialize_ensemble(init, params.n_particles, seed, params.threads);
  const bool has_target = rule.target.size() > 0;
  int hits = 0;

  for (int k = 0;; ++k) {
    const auto values = evaluate(ensemble, objective, params.threads);
    Vector consensus = consensus_point(ensemble.positions, values, params.alpha);

    IterationRecord record;
    record.iteration = k;
    record.best_value = values[static_cast<std::size_t>(hardmin_index(values))];
    record.coordinate_variance = unbiased_variance_per_coordinate(ensemble.positions);
    record.empirical_variance = record.coordinate_variance.mean();
    record.distance = has_target ? (consensus - rule.target).norm()
                                 : std::numeric_limits<double>::quiet_NaN();
    record.consensus = consensus;
    trace.records.push_back(std::move(record));
    if (observer) observer(ensemble, consensus);

    if (has_target && !trace.converged_at) {
      hits = trace.records.back().distance <= rule.epsilon ? hits + 1 : 0;
      if (hits >= rule.consecutive) {
        trace.converged_at = k;
        trace.status = RunStatus::converged;
        if (rule.stop_on_convergence) break;
      }
    }
    if (k >= rule.max_iterations) break;

    try {
      switch (params.scheme) {
        case Scheme::cbo_em:
          ensemble = cbo_em_update(ensemble, consensus, params);
          break;
        case Scheme::delta_cbo_em:
          ensemble = delta_cbo_em_update(ensemble, consensus, params);
          break;
        case Scheme::consensus_freezing:
          ensemble = consensus_freezing_update(ensemble, consensus, params.omega(),
                                               params.stationary_variance(), params.threads);
          break;
        case Scheme::consensus_hopping:
          ensemble = gaussian_cloud(consensus, params.sampling_variance(), params.n_particles,
                                    seed, ensemble.iteration + 1, params.threads);
          break;
      }
    } catch (const DivergenceError& e) {
      trace.status = RunStatus::diverged;
      trace.diagnostic = e.what();
      break;
    }
  }
  return trace;
}

}  // namespace consensus_opt
