#pragma once

#include <span>
#include <vector>

#include "consensus_opt/types.hpp"

namespace consensus_opt {

// Normalized Gibbs weights e^{-alpha (f_j - min f)} over an ensemble.
struct SoftminWeights {
  std::vector<double> weights;
  // log of sum_j e^{-alpha (f_j - min f)}; the shift makes this lie in [0, log N].
  double log_normalizer = 0.0;
};

// Fixed-shape pairwise summation. The result depends only on the input order,
// never on how the caller partitioned work.
double pairwise_sum(std::span<const double> values);

// Throws std::invalid_argument("empty ensemble") for N = 0, std::domain_error
// for non-finite values or alpha < 0 / non-finite alpha.
SoftminWeights softmin_weights(std::span<const double> values, double alpha);

// sum_j w_j x_j. Throws std::invalid_argument on a row/weight count mismatch.
Vector consensus_point(const Positions& positions, const SoftminWeights& weights);

// Convenience: consensus_point(positions, softmin_weights(values, alpha)).
Vector consensus_point(const Positions& positions, std::span<const double> values, double alpha);

// Index of the smallest value, lowest index on ties.
Eigen::Index hardmin_index(std::span<const double> values);

// Position of the particle with the smallest value (lowest index on ties).
Vector hardmin_point(const Positions& positions, std::span<const double> values);

}  // namespace consensus_opt
