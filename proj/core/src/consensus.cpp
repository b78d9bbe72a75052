#include "consensus_opt/consensus.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace consensus_opt {
namespace {

constexpr std::size_t kPairwiseBlock = 8;

void require_finite_values(std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) throw std::domain_error("non-finite objective value in ensemble");
  }
}

}  // namespace

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= kPairwiseBlock) {
    double total = 0.0;
    for (double v : values) total += v;
    return total;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

SoftminWeights softmin_weights(std::span<const double> values, double alpha) {
  if (values.empty()) throw std::invalid_argument("empty ensemble");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw std::domain_error("alpha must be finite and >= 0");
  }
  require_finite_values(values);

  const double f_min = *std::min_element(values.begin(), values.end());
  SoftminWeights out;
  out.weights.resize(values.size());
  for (std::size_t j = 0; j < values.size(); ++j) {
    // Exponent is <= 0 and equals 0 at the minimizer, so the sum is >= 1.
    const double gap = values[j] - f_min;
    out.weights[j] = alpha == 0.0 ? 1.0 : std::exp(-alpha * gap);
  }
  const double total = pairwise_sum(out.weights);
  out.log_normalizer = std::log(total);
  for (double& w : out.weights) w /= total;
  return out;
}

Vector consensus_point(const Positions& positions, const SoftminWeights& weights) {
  const auto n = positions.rows();
  if (n != static_cast<Eigen::Index>(weights.weights.size())) {
    throw std::invalid_argument("dimension mismatch: positions has " + std::to_string(n) +
                                " rows but " + std::to_string(weights.weights.size()) +
                                " weights were given");
  }
  const auto d = positions.cols();
  Vector result(d);
  if (n == 0) return result.setZero();
  // Sum offsets from the heaviest particle: a collapsed ensemble or a single
  // surviving weight then reproduces that particle bit for bit.
  const auto& w = weights.weights;
  const auto anchor = std::max_element(w.begin(), w.end()) - w.begin();
  std::vector<double> terms(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < d; ++k) {
    const double base = positions(anchor, k);
    for (Eigen::Index j = 0; j < n; ++j) {
      terms[static_cast<std::size_t>(j)] = w[static_cast<std::size_t>(j)] * (positions(j, k) - base);
    }
    result[k] = base + pairwise_sum(terms);
  }
  return result;
}

Vector consensus_point(const Positions& positions, std::span<const double> values, double alpha) {
  return consensus_point(positions, softmin_weights(values, alpha));
}

Eigen::Index hardmin_index(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("empty ensemble");
  // min_element returns the first minimum, which is the lowest-index tie-break.
  return static_cast<Eigen::Index>(std::min_element(values.begin(), values.end()) - values.begin());
}

Vector hardmin_point(const Positions& positions, std::span<const double> values) {
  if (positions.rows() != static_cast<Eigen::Index>(values.size())) {
    throw std::invalid_argument("dimension mismatch between positions and values");
  }
  return positions.row(hardmin_index(values)).transpose();
}

}  // namespace consensus_opt
