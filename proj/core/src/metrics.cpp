#include "consensus_opt/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include "consensus_opt/assignment.hpp"
#include "consensus_opt/consensus.hpp"

namespace consensus_opt {

Vector unbiased_variance_per_coordinate(const Positions& positions) {
  const auto n = positions.rows();
  if (n < 2) throw std::invalid_argument("unbiased variance needs at least 2 particles");
  const auto d = positions.cols();
  Vector out(d);
  std::vector<double> column(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < d; ++k) {
    for (Eigen::Index j = 0; j < n; ++j) column[static_cast<std::size_t>(j)] = positions(j, k);
    const double mean = pairwise_sum(column) / static_cast<double>(n);
    for (double& v : column) v = (v - mean) * (v - mean);
    out[k] = pairwise_sum(column) / static_cast<double>(n - 1);
  }
  return out;
}

double unbiased_variance(const Positions& positions) {
  return unbiased_variance_per_coordinate(positions).mean();
}

double expected_ou_variance(double var0, double lambda, double delta, double t) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
  if (!(t >= 0.0)) throw std::invalid_argument("t must be >= 0");
  const double omega_sq = std::exp(-2.0 * lambda * t);
  return var0 * omega_sq + delta * delta / (2.0 * lambda) * (1.0 - omega_sq);
}

double gaussian_w2(const GaussianState& a, const GaussianState& b) {
  if (a.mean.size() != b.mean.size()) throw std::invalid_argument("dimension mismatch");
  const double spread = std::sqrt(a.variance) - std::sqrt(b.variance);
  return std::sqrt((a.mean - b.mean).squaredNorm() + static_cast<double>(a.dim()) * spread * spread);
}

double gaussian_kl(const GaussianState& a, const GaussianState& b) {
  if (a.mean.size() != b.mean.size()) throw std::invalid_argument("dimension mismatch");
  if (!(a.variance > 0.0) || !(b.variance > 0.0)) {
    throw std::invalid_argument("variances must be > 0");
  }
  const double ratio = a.variance / b.variance;
  return (a.mean - b.mean).squaredNorm() / (2.0 * b.variance) +
         0.5 * static_cast<double>(a.dim()) * (ratio - 1.0 - std::log(ratio));
}

double empirical_w2(const Positions& a, const Positions& b) {
  if (a.rows() != b.rows()) throw std::invalid_argument("empirical_w2 needs equal cloud sizes");
  if (a.cols() != b.cols()) throw std::invalid_argument("dimension mismatch");
  const auto n = a.rows();
  if (n > kAssignmentSizeLimit) throw std::length_error("assignment size limit");
  if (n == 0) return 0.0;

  Eigen::MatrixXd cost(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) cost(i, j) = (a.row(i) - b.row(j)).squaredNorm();
  }
  const Assignment match = solve_assignment(cost);
  std::vector<double> terms(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    terms[static_cast<std::size_t>(i)] = cost(i, match.row_to_col[static_cast<std::size_t>(i)]);
  }
  return std::sqrt(std::max(0.0, pairwise_sum(terms)) / static_cast<double>(n));
}

double dist_to_minimizer(const Vector& x, const Objective& objective) {
  const auto& minimizer = objective.minimizer();
  if (!minimizer) {
    throw std::invalid_argument("objective '" + objective.name() + "' has no known minimizer");
  }
  if (minimizer->size() != x.size()) throw std::invalid_argument("dimension mismatch");
  return (x - *minimizer).norm();
}

}  // namespace consensus_opt
