#pragma once

#include "consensus_opt/objectives.hpp"
#include "consensus_opt/types.hpp"

namespace consensus_opt {

// Isotropic Gaussian N(mean, variance I).
struct GaussianState {
  Vector mean;
  double variance = 1.0;

  int dim() const { return static_cast<int>(mean.size()); }
};

// Unbiased sample variance of each coordinate, 1/(N-1) normalization.
// Throws std::invalid_argument for N < 2.
Vector unbiased_variance_per_coordinate(const Positions& positions);
// Mean of the per-coordinate values above.
double unbiased_variance(const Positions& positions);

// Expected unbiased variance of the frozen-consensus OU particle system at
// time t: var0 e^{-2 lambda t} + delta^2/(2 lambda) (1 - e^{-2 lambda t}).
double expected_ou_variance(double var0, double lambda, double delta, double t);

// Closed-form W2 between isotropic Gaussians:
// sqrt(|mu_a - mu_b|^2 + d (sigma_a - sigma_b)^2).
double gaussian_w2(const GaussianState& a, const GaussianState& b);

// KL(a || b) for isotropic Gaussians.
double gaussian_kl(const GaussianState& a, const GaussianState& b);

inline constexpr Eigen::Index kAssignmentSizeLimit = 1024;

// sqrt(min_pi (1/N) sum_i |a_i - b_pi(i)|^2) via an exact assignment solve.
// Throws std::invalid_argument for unequal sizes or dimensions and
// std::length_error("assignment size limit") above kAssignmentSizeLimit.
double empirical_w2(const Positions& a, const Positions& b);

// Throws std::invalid_argument if the objective has no known minimizer.
double dist_to_minimizer(const Vector& x, const Objective& objective);

}  // namespace consensus_opt
