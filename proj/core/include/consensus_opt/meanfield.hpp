#pragma once

#include <cstdint>
#include <vector>

#include "consensus_opt/metrics.hpp"
#include "consensus_opt/objectives.hpp"
#include "consensus_opt/types.hpp"

namespace consensus_opt {

inline constexpr int kDefaultMonteCarloSamples = 100000;

// Monte Carlo estimate of the consensus point of N(mu, variance I):
// samples mu + sqrt(variance) z_i with z_i drawn from StreamKey(seed, i,
// stream_iteration, 0). Reusing (seed, stream_iteration) reuses the same z_i,
// which makes the estimated map a deterministic function of mu.
// Throws std::invalid_argument for mc_n < 100 or variance <= 0.
Vector t_alpha_map(const Vector& mu, double variance, double alpha, const Objective& objective,
                   int mc_n, std::uint64_t seed, std::uint32_t stream_iteration = 0,
                   int threads = 1);

// (1 - omega) t_alpha_of_mu + omega mu, for omega in [0, 1].
Vector cf_mean_step(const Vector& mu, double omega, const Vector& t_alpha_of_mu);

// omega^2 sigma2 + (1 - omega^2) stationary.
double cf_variance_step(double sigma2, double omega, double stationary);

// 3 sqrt(variance d / mc_n): three standard errors of a plain Monte Carlo mean.
double monte_carlo_noise_floor(double variance, int dim, int mc_n);

struct FixedPointReport {
  Vector fixed_point;
  int iterations = 0;
  double residual = 0.0;               // |T(mu) - mu| at the last iteration
  double estimated_contraction = 0.0;  // median of the last 5 residual ratios, NaN if < 2 residuals
  bool converged = false;
  bool contraction_flag = false;       // estimated_contraction >= 1
  std::vector<double> residuals;
};

// Banach iteration mu <- T(mu) with common random numbers until the residual
// drops to tol or max_iter iterations. Throws std::invalid_argument when tol
// does not exceed monte_carlo_noise_floor(variance, d, mc_n).
FixedPointReport fixed_point_solve(const Vector& mu0, double variance, double alpha,
                                   const Objective& objective, double tol, int max_iter,
                                   int mc_n, std::uint64_t seed, int threads = 1);

// x_{j+1} = T(x_j) with fresh samples per iteration (stream j + 1).
// Returns x_0..x_k.
std::vector<Vector> ch_meanfield_iterate(const Vector& mu0, double variance, double alpha,
                                         const Objective& objective, int k, int mc_n,
                                         std::uint64_t seed, int threads = 1);

// Gaussian state of the CF mean-field flow one interval later.
GaussianState cf_gaussian_step(const GaussianState& state, double omega, double stationary,
                               const Vector& t_alpha_of_mean);

}  // namespace consensus_opt
