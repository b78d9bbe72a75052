#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "consensus_opt/consensus.hpp"

using namespace consensus_opt;

namespace {

double weight_sum(const SoftminWeights& w) {
  return std::accumulate(w.weights.begin(), w.weights.end(), 0.0);
}

Positions random_positions(std::mt19937_64& rng, int n, int d, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Positions p(n, d);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < d; ++k) p(i, k) = u(rng);
  return p;
}

}  // namespace

TEST_CASE("softmin examples") {
  const auto equal = softmin_weights(std::vector{1.0, 1.0, 1.0}, 7.0);
  for (double w : equal.weights) CHECK(w == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  const auto sharp = softmin_weights(std::vector{0.0, 1.0}, 1e15);
  CHECK(sharp.weights[0] == 1.0);
  CHECK(sharp.weights[1] <= 1e-300);

  const auto ln2 = softmin_weights(std::vector{0.0, std::log(2.0)}, 1.0);
  CHECK(ln2.weights[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(ln2.weights[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("softmin errors") {
  CHECK_THROWS_WITH_AS(softmin_weights(std::vector<double>{}, 1.0), "empty ensemble",
                       std::invalid_argument);
  CHECK_THROWS_AS(softmin_weights(std::vector{0.0, std::nan("")}, 1.0), std::domain_error);
  CHECK_THROWS_AS(softmin_weights(std::vector{0.0, HUGE_VAL}, 1.0), std::domain_error);
  CHECK_THROWS_AS(softmin_weights(std::vector{0.0}, -1.0), std::domain_error);
}

TEST_CASE("weights are finite, normalized and the shifted maximum is 1") {
  std::mt19937_64 rng(3);
  for (double alpha : {0.0, 1e-3, 1.0, 1e3, 1e9, 1e15, 1e16}) {
    for (int trial = 0; trial < 50; ++trial) {
      std::uniform_real_distribution<double> u(-1e3, 1e3);
      std::vector<double> values(1 + trial * 7);
      for (double& v : values) v = u(rng);
      const auto w = softmin_weights(values, alpha);
      for (double x : w.weights) REQUIRE(std::isfinite(x));
      REQUIRE(std::abs(weight_sum(w) - 1.0) <= 1e-12);
      // The largest unnormalized weight is e^0 = 1, so max w = 1 / e^{log_normalizer}.
      const double wmax = *std::max_element(w.weights.begin(), w.weights.end());
      REQUIRE(wmax * std::exp(w.log_normalizer) == doctest::Approx(1.0).epsilon(1e-12));
      REQUIRE(w.log_normalizer >= 0.0);
      REQUIRE(w.log_normalizer <= std::log(static_cast<double>(values.size())) + 1e-12);
    }
  }
}

TEST_CASE("alpha 1e15 on values spanning [0, 50]") {
  std::vector<double> values(1000);
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = 50.0 * i / 999.0;
  const auto w = softmin_weights(values, 1e15);
  for (double x : w.weights) REQUIRE(std::isfinite(x));
  CHECK(std::abs(weight_sum(w) - 1.0) <= 1e-12);
  CHECK(w.weights[0] == 1.0);
}

TEST_CASE("shift invariance") {
  SUBCASE("exact on dyadic values") {
    const std::vector<double> values{0.5, 1.25, 3.0, 0.75, 2.0};
    for (double c : {-8.0, 0.25, 1024.0}) {
      std::vector<double> shifted = values;
      for (double& v : shifted) v += c;
      for (double alpha : {0.0, 1.0, 3.5, 1e15}) {
        CHECK(softmin_weights(shifted, alpha).weights == softmin_weights(values, alpha).weights);
      }
    }
  }
  SUBCASE("to rounding on arbitrary values") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> values(64);
    for (double& v : values) v = u(rng);
    std::vector<double> shifted = values;
    for (double& v : shifted) v += 0.3;
    const auto a = softmin_weights(values, 2.0), b = softmin_weights(shifted, 2.0);
    for (std::size_t i = 0; i < values.size(); ++i)
      CHECK(std::abs(a.weights[i] - b.weights[i]) <= 1e-12);
  }
}

TEST_CASE("consensus examples") {
  Positions p1(2, 1);
  p1 << 0.0, 2.0;
  CHECK(consensus_point(p1, std::vector{5.0, -3.0}, 0.0)(0) == doctest::Approx(1.0));

  Positions p2(2, 2);
  p2 << 0.0, 0.0, 1.0, 1.0;
  const SoftminWeights w{{1.0, 0.0}, 0.0};
  CHECK(consensus_point(p2, w) == Vector::Zero(2));

  Positions p3(3, 1);
  p3 << 0.0, 1.0, 2.0;
  const std::vector<double> f{0.0, 1.0, 4.0};
  const double e0 = 1.0, e1 = std::exp(-1.0), e4 = std::exp(-4.0);
  const double expected = (0.0 * e0 + 1.0 * e1 + 2.0 * e4) / (e0 + e1 + e4);
  CHECK(consensus_point(p3, f, 1.0)(0) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("consensus rejects a row/weight mismatch") {
  Positions p(3, 2);
  p.setZero();
  const SoftminWeights w{{0.5, 0.5}, 0.0};
  CHECK_THROWS_AS(consensus_point(p, w), std::invalid_argument);
}

TEST_CASE("alpha 0 recovers the plain mean") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const Positions p = random_positions(rng, 37 + trial, 3, 10.0);
    std::vector<double> values(p.rows());
    for (double& v : values) v = std::uniform_real_distribution<double>(0, 100)(rng);
    const Vector c = consensus_point(p, values, 0.0);
    const Vector mean = p.colwise().mean().transpose();
    CHECK((c - mean).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("hardmin") {
  Positions p(3, 1);
  p << 10.0, 11.0, 12.0;
  CHECK(hardmin_point(p, std::vector{3.0, 1.0, 2.0})(0) == 11.0);
  Positions q(2, 1);
  q << 10.0, 11.0;
  CHECK(hardmin_point(q, std::vector{1.0, 1.0})(0) == 10.0);
  CHECK_THROWS_AS(hardmin_index(std::vector<double>{}), std::invalid_argument);

  std::mt19937_64 rng(1);
  const Positions r = random_positions(rng, 100, 2, 1.0);
  std::vector<double> values(100);
  for (double& v : values) v = std::uniform_real_distribution<double>(0, 1)(rng);
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] < values[best]) best = i;
  CHECK(hardmin_point(r, values) == r.row(static_cast<Eigen::Index>(best)).transpose());
}

TEST_CASE("consensus approaches hardmin as alpha grows") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const Positions p = random_positions(rng, 50, 3, 5.0);
    std::vector<double> values(50);
    for (double& v : values) v = std::uniform_real_distribution<double>(0, 50)(rng);
    // Force a unique minimum separated by at least 1e-12... and exactly that in some trials.
    const auto imin = hardmin_index(values);
    for (std::size_t i = 0; i < values.size(); ++i)
      if (static_cast<Eigen::Index>(i) != imin && values[i] - values[imin] < 1e-12)
        values[i] = values[imin] + 1e-12;
    if (trial % 4 == 0) values[(imin + 1) % 50] = values[imin] + 1.5e-12;

    const Vector hard = hardmin_point(p, values);
    const double last = (consensus_point(p, values, 1e15) - hard).cwiseAbs().maxCoeff();
    REQUIRE(last <= 1e-9);
    // The path need not be monotone, but no earlier alpha gets closer.
    for (double alpha : {1.0, 10.0, 1e3, 1e9}) {
      const double gap = (consensus_point(p, values, alpha) - hard).cwiseAbs().maxCoeff();
      REQUIRE(last <= gap + 1e-12);
    }
  }
}

TEST_CASE("consensus stays in the convex hull in 1-D") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const Positions p = random_positions(rng, 1 + trial % 40, 1, 100.0);
    std::vector<double> values(p.rows());
    for (double& v : values) v = std::uniform_real_distribution<double>(-5, 5)(rng);
    const double alpha = std::pow(10.0, (trial % 17) - 1);
    const double c = consensus_point(p, values, alpha)(0);
    REQUIRE(c >= p.minCoeff());
    REQUIRE(c <= p.maxCoeff());
  }
}

TEST_CASE("pairwise sum is exact on integers and independent of chunking") {
  std::vector<double> v(10007);
  std::iota(v.begin(), v.end(), 1.0);
  CHECK(pairwise_sum(v) == 10007.0 * 10008.0 / 2.0);
  CHECK(pairwise_sum(std::vector<double>{}) == 0.0);
  std::mt19937_64 rng(2);
  for (double& x : v) x = std::uniform_real_distribution<double>(0, 1)(rng);
  CHECK(pairwise_sum(v) == pairwise_sum(v));
  CHECK(std::abs(pairwise_sum(v) - std::accumulate(v.begin(), v.end(), 0.0)) <= 1e-9);
}
