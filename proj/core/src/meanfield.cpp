#include "consensus_opt/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "consensus_opt/consensus.hpp"
#include "consensus_opt/parallel.hpp"
#include "consensus_opt/sampling.hpp"

namespace consensus_opt {

Vector t_alpha_map(const Vector& mu, double variance, double alpha, const Objective& objective,
                   int mc_n, std::uint64_t seed, std::uint32_t stream_iteration, int threads) {
  if (mc_n < 100) throw std::invalid_argument("mc_n must be >= 100");
  if (!(variance > 0.0)) throw std::invalid_argument("variance must be > 0");
  if (mu.size() != objective.dim()) throw std::invalid_argument("mu dimension does not match objective");

  const auto d = mu.size();
  const double scale = std::sqrt(variance);
  Positions samples(mc_n, d);
  std::vector<double> values(static_cast<std::size_t>(mc_n));
  parallel_for(values.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      auto row = row_span(samples, static_cast<Eigen::Index>(i));
      gaussian_fill({seed, static_cast<std::uint32_t>(i), stream_iteration, 0}, row);
      for (Eigen::Index k = 0; k < d; ++k) row[k] = mu[k] + scale * row[k];
      values[i] = objective(std::span<const double>(row));
    }
  });
  return consensus_point(samples, values, alpha);
}

Vector cf_mean_step(const Vector& mu, double omega, const Vector& t_alpha_of_mu) {
  if (!(omega >= 0.0 && omega <= 1.0)) throw std::invalid_argument("omega must lie in [0, 1]");
  if (mu.size() != t_alpha_of_mu.size()) throw std::invalid_argument("dimension mismatch");
  return (1.0 - omega) * t_alpha_of_mu + omega * mu;
}

double cf_variance_step(double sigma2, double omega, double stationary) {
  const double omega_sq = omega * omega;
  return omega_sq * sigma2 + (1.0 - omega_sq) * stationary;
}

double monte_carlo_noise_floor(double variance, int dim, int mc_n) {
  return 3.0 * std::sqrt(variance * dim / static_cast<double>(mc_n));
}

FixedPointReport fixed_point_solve(const Vector& mu0, double variance, double alpha,
                                   const Objective& objective, double tol, int max_iter,
                                   int mc_n, std::uint64_t seed, int threads) {
  const double floor = monte_carlo_noise_floor(variance, static_cast<int>(mu0.size()), mc_n);
  if (!(tol > floor)) {
    throw std::invalid_argument("tol " + std::to_string(tol) +
                                " does not exceed the Monte Carlo noise floor " +
                                std::to_string(floor));
  }
  if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");

  FixedPointReport report;
  Vector mu = mu0;
  for (int i = 0; i < max_iter; ++i) {
    Vector next = t_alpha_map(mu, variance, alpha, objective, mc_n, seed, 0, threads);
    report.residual = (next - mu).norm();
    report.residuals.push_back(report.residual);
    report.iterations = i + 1;
    mu = std::move(next);
    if (report.residual <= tol) {
      report.converged = true;
      break;
    }
  }
  report.fixed_point = mu;

  std::vector<double> ratios;
  const auto& r = report.residuals;
  for (std::size_t i = r.size() > 5 ? r.size() - 5 : 1; i < r.size(); ++i) {
    if (r[i - 1] > 0.0) ratios.push_back(r[i] / r[i - 1]);
  }
  if (ratios.empty()) {
    report.estimated_contraction = std::numeric_limits<double>::quiet_NaN();
  } else {
    std::sort(ratios.begin(), ratios.end());
    const std::size_t m = ratios.size();
    report.estimated_contraction =
        m % 2 == 1 ? ratios[m / 2] : 0.5 * (ratios[m / 2 - 1] + ratios[m / 2]);
    report.contraction_flag = report.estimated_contraction >= 1.0;
  }
  return report;
}

std::vector<Vector> ch_meanfield_iterate(const Vector& mu0, double variance, double alpha,
                                         const Objective& objective, int k, int mc_n,
                                         std::uint64_t seed, int threads) {
  if (k < 0) throw std::invalid_argument("k must be >= 0");
  std::vector<Vector> trajectory{mu0};
  trajectory.reserve(static_cast<std::size_t>(k) + 1);
  for (int j = 0; j < k; ++j) {
    trajectory.push_back(t_alpha_map(trajectory.back(), variance, alpha, objective, mc_n, seed,
                                     static_cast<std::uint32_t>(j + 1), threads));
  }
  return trajectory;
}

GaussianState cf_gaussian_step(const GaussianState& state, double omega, double stationary,
                               const Vector& t_alpha_of_mean) {
  return {cf_mean_step(state.mean, omega, t_alpha_of_mean),
          cf_variance_step(state.variance, omega, stationary)};
}

}  // namespace consensus_opt
