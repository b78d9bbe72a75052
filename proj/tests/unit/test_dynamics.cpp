#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "consensus_opt/consensus.hpp"
#include "consensus_opt/dynamics.hpp"
#include "consensus_opt/metrics.hpp"
#include "consensus_opt/sampling.hpp"

using namespace consensus_opt;

namespace {

ParticleEnsemble make_ensemble(Positions p, std::uint64_t seed = 1, std::uint32_t iteration = 0) {
  return {std::move(p), iteration, seed};
}

ParticleEnsemble constant_ensemble(int n, const Vector& x) {
  Positions p(n, x.size());
  for (int i = 0; i < n; ++i) p.row(i) = x.transpose();
  return make_ensemble(p);
}

SolverParams params_for(Scheme scheme) {
  SolverParams p;
  p.scheme = scheme;
  p.n_particles = 100;
  return p;
}

Vector column_means(const Positions& p) { return p.colwise().mean().transpose(); }

}  // namespace

TEST_CASE("scheme names round trip") {
  for (auto s : {Scheme::cbo_em, Scheme::delta_cbo_em, Scheme::consensus_freezing,
                 Scheme::consensus_hopping})
    CHECK(parse_scheme(scheme_name(s)) == s);
  CHECK(scheme_name(Scheme::delta_cbo_em) == "delta-cbo");
  CHECK_THROWS_AS(parse_scheme("euler"), std::invalid_argument);
}

TEST_CASE("parameter validation names the field") {
  SolverParams p;
  p.alpha = -1;
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("alpha"), std::invalid_argument);
  p = SolverParams{};
  p.lambda = 0;
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("lambda"), std::invalid_argument);
  p = SolverParams{};
  p.n_particles = 1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = SolverParams{};
  p.dt = 0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  CHECK_NOTHROW(SolverParams{}.validate());
}

TEST_CASE("hopping variance defaults to the stationary variance") {
  SolverParams p;
  p.delta = 1.0;
  p.lambda = 1.0;
  CHECK(p.sampling_variance() == 0.5);
  p.hopping_variance = 0.25;
  CHECK(p.sampling_variance() == 0.25);
}

TEST_CASE("cbo keeps a Dirac ensemble fixed for any parameters") {
  const Objective obj = make_ackley(3);
  const Vector x{{1.5, -2.0, 0.25}};
  for (double sigma : {0.0, 1.0, 10.0}) {
    for (double dt : {0.01, 1.0, 50.0}) {
      SolverParams p = params_for(Scheme::cbo_em);
      p.sigma = sigma;
      p.dt = dt;
      const auto next = step_cbo_em(constant_ensemble(20, x), p, obj);
      for (int i = 0; i < 20; ++i) REQUIRE(next.positions.row(i).transpose() == x);
    }
  }
}

TEST_CASE("lambda dt = 1 without noise jumps to the consensus") {
  const Objective obj = make_quadratic(2);
  const auto ens = initialize_ensemble(InitSpec::box(-3, 3, 2), 50, 4);
  const Vector c = consensus_point(ens.positions, evaluate(ens, obj), 1e15);
  SolverParams p = params_for(Scheme::cbo_em);
  p.dt = 1.0;
  p.sigma = 0.0;
  auto next = step_cbo_em(ens, p, obj);
  for (int i = 0; i < 50; ++i) REQUIRE((next.positions.row(i).transpose() - c).norm() <= 1e-12);

  p.scheme = Scheme::delta_cbo_em;
  p.delta = 0.0;
  next = step_delta_cbo_em(ens, p, obj);
  for (int i = 0; i < 50; ++i) REQUIRE((next.positions.row(i).transpose() - c).norm() <= 1e-12);
}

TEST_CASE("lambda dt = 2 without noise reflects through the consensus") {
  const Objective obj = make_quadratic(2);
  const auto ens = initialize_ensemble(InitSpec::box(-3, 3, 2), 30, 8);
  const Vector c = consensus_point(ens.positions, evaluate(ens, obj), 2.0);
  SolverParams p = params_for(Scheme::delta_cbo_em);
  p.alpha = 2.0;
  p.dt = 2.0;
  p.delta = 0.0;
  const auto next = step_delta_cbo_em(ens, p, obj);
  for (int i = 0; i < 30; ++i) {
    const Vector expect = 2.0 * c - ens.positions.row(i).transpose();
    REQUIRE((next.positions.row(i).transpose() - expect).norm() <= 1e-12);
  }
}

TEST_CASE("cbo step matches a scalar computation with the same draws") {
  Positions p(2, 1);
  p << 0.3, 1.7;
  const auto ens = make_ensemble(p, 77, 4);
  const Objective obj = make_quadratic(1);
  SolverParams sp = params_for(Scheme::cbo_em);
  sp.alpha = 1.5;
  sp.lambda = 0.8;
  sp.sigma = 0.6;
  sp.dt = 0.05;

  const double f0 = 0.3 * 0.3, f1 = 1.7 * 1.7;
  const double w0 = 1.0, w1 = std::exp(-1.5 * (f1 - f0));
  const double c = (0.3 * w0 + 1.7 * w1) / (w0 + w1);
  const auto next = step_cbo_em(ens, sp, obj);
  CHECK(next.iteration == 5);
  for (int j = 0; j < 2; ++j) {
    const double x = p(j, 0);
    const double b = gaussian_draw({77, static_cast<std::uint32_t>(j), 5, 0}, 1)(0);
    const double expect = x - 0.8 * 0.05 * (x - c) + std::sqrt(0.05) * 0.6 * std::abs(x - c) * b;
    CHECK(next.positions(j, 0) == doctest::Approx(expect).epsilon(1e-14));
  }

  sp.scheme = Scheme::delta_cbo_em;
  sp.delta = 0.9;
  const auto dnext = step_delta_cbo_em(ens, sp, obj);
  for (int j = 0; j < 2; ++j) {
    const double x = p(j, 0);
    const double b = gaussian_draw({77, static_cast<std::uint32_t>(j), 5, 0}, 1)(0);
    const double expect = x - 0.8 * 0.05 * (x - c) + std::sqrt(0.05) * 0.9 * b;
    CHECK(dnext.positions(j, 0) == doctest::Approx(expect).epsilon(1e-14));
  }
}

TEST_CASE("delta-cbo with lambda 0 is a random walk with variance increment delta^2 dt") {
  const int n = 100000;
  const auto ens = constant_ensemble(n, Vector::Zero(2));
  SolverParams p = params_for(Scheme::delta_cbo_em);
  p.lambda = 0.0;
  p.delta = 1.3;
  p.dt = 0.2;
  const auto next = delta_cbo_em_update(ens, Vector::Zero(2), p);
  const Vector var = unbiased_variance_per_coordinate(next.positions);
  for (int k = 0; k < 2; ++k) CHECK(var[k] == doctest::Approx(1.3 * 1.3 * 0.2).epsilon(0.01));
}

TEST_CASE("cf with omega 1 is the identity and omega 0 is a CH cloud") {
  const auto ens = initialize_ensemble(InitSpec::box(-1, 1, 3), 40, 12);
  const Vector c{{0.1, 0.2, 0.3}};
  const auto same = consensus_freezing_update(ens, c, 1.0, 0.5);
  CHECK(same.positions == ens.positions);

  const auto hop = consensus_freezing_update(ens, c, 0.0, 0.5);
  const auto cloud = gaussian_cloud(c, 0.5, 40, 12, 1);
  CHECK((hop.positions - cloud.positions).cwiseAbs().maxCoeff() <= 1e-15);

  SolverParams p = params_for(Scheme::consensus_freezing);
  p.dt = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("cf coefficient identities") {
  for (double dt : {1e-3, 0.1, 1.0, 7.0}) {
    SolverParams a;
    a.dt = dt;
    SolverParams b = a;
    b.dt = 2 * dt;
    CHECK(b.omega() == doctest::Approx(a.omega() * a.omega()).epsilon(1e-15));
    const double w = a.omega(), s2 = a.stationary_variance();
    // two half steps vs one full step
    CHECK(w * w * (1 - w * w) * s2 + (1 - w * w) * s2 ==
          doctest::Approx((1 - std::pow(w, 4)) * s2).epsilon(1e-15));
    // stationarity
    CHECK(w * w * s2 + (1 - w * w) * s2 == doctest::Approx(s2).epsilon(1e-15));
  }
}

TEST_CASE("cf preserves the stationary Gaussian on samples") {
  const int n = 100000;
  const Vector c{{1.0, -2.0}};
  SolverParams p;
  p.delta = 1.0;
  p.lambda = 1.0;
  p.dt = 0.3;
  const auto ens = gaussian_cloud(c, p.stationary_variance(), n, 3, 0);
  const auto next = consensus_freezing_update(ens, c, p.omega(), p.stationary_variance());
  const Vector var = unbiased_variance_per_coordinate(next.positions);
  const Vector mean = column_means(next.positions);
  for (int k = 0; k < 2; ++k) {
    CHECK(var[k] == doctest::Approx(0.5).epsilon(0.02));
    CHECK(std::abs(mean[k] - c[k]) <= 3 * std::sqrt(0.5 / n));
  }
}

TEST_CASE("small-dt cf matches an em step on a frozen consensus") {
  const int n = 100000;
  SolverParams p;
  p.delta = 1.0;
  p.lambda = 1.0;
  p.dt = 1e-3;
  const Vector c = Vector::Zero(1);
  const auto ens = gaussian_cloud(Vector::Constant(1, 2.0), 0.25, n, 21, 0);
  const auto cf = consensus_freezing_update(ens, c, p.omega(), p.stationary_variance());
  const auto em = delta_cbo_em_update(ens, c, p);
  // Same draws, so the particle-wise gap is the coefficient gap: O(dt^2) in the drift and
  // O(dt^{3/2}) in the noise amplitude.
  const double mean_gap = std::abs(column_means(cf.positions)[0] - column_means(em.positions)[0]);
  const double var_gap = std::abs(unbiased_variance(cf.positions) - unbiased_variance(em.positions));
  CHECK(mean_gap <= 10 * p.dt * p.dt);
  CHECK(var_gap <= 10 * p.dt * p.dt);
}

TEST_CASE("em contracts iff |1 - lambda dt| < 1 on a frozen two-particle toy") {
  Positions p(2, 1);
  p << -1.0, 1.0;
  for (double ldt : {0.5, 1.5, 1.99, 2.5, 3.0}) {
    SolverParams sp;
    sp.delta = 0.0;
    sp.lambda = 1.0;
    sp.dt = ldt;
    auto ens = make_ensemble(p);
    double prev = 1.0;
    for (int it = 0; it < 10; ++it) {
      ens = delta_cbo_em_update(ens, Vector::Zero(1), sp);
      const double dist = ens.positions.cwiseAbs().maxCoeff();
      if (ldt < 2.0)
        REQUIRE(dist < prev);
      else
        REQUIRE(dist == doctest::Approx(prev * std::abs(1 - ldt)).epsilon(1e-12));
      prev = dist;
    }
  }
}

TEST_CASE("ch step examples") {
  const Objective obj = make_quadratic(2);
  SolverParams p = params_for(Scheme::consensus_hopping);
  p.n_particles = 10000;
  p.alpha = 0.0;
  p.hopping_variance = 0.5;
  const Vector center{{3.0, -1.0}};
  const auto seed_ens = make_ensemble(Positions(0, 2), 31);
  const auto [next, cloud] = step_consensus_hopping(seed_ens, p, obj, center);
  CHECK(cloud.size() == 10000);
  CHECK((next - center).norm() <= std::sqrt(0.5) * std::sqrt(2.0 / 10000) * 3);

  // Mean-field quadratic: center / (1 + 2 alpha s2).
  p.alpha = 1.0;
  p.n_particles = 1000000;
  const auto [shrunk, big] = step_consensus_hopping(seed_ens, p, obj, center);
  const Vector expect = center / (1 + 2 * 1.0 * 0.5);
  CHECK((shrunk - expect).norm() <= 0.01 * expect.norm());
}

TEST_CASE("hardmin limit picks an inserted minimizer") {
  const Objective obj = make_ackley(2);
  auto ens = initialize_ensemble(InitSpec::box(-3, 3, 2), 200, 6);
  ens.positions.row(57).setZero();
  const Vector c = consensus_point(ens.positions, evaluate(ens, obj), 1e15);
  CHECK(c == Vector::Zero(2));
}

TEST_CASE("initialization") {
  const auto box = initialize_ensemble(InitSpec::box(5, 7, 5), 1000, 9);
  CHECK(box.positions.minCoeff() >= 5.0);
  CHECK(box.positions.maxCoeff() <= 7.0);
  CHECK(box.iteration == 0);
  CHECK(InitSpec::box(5, 7, 5).coordinate_variance() == doctest::Approx(1.0 / 3.0));
  CHECK(InitSpec::gaussian(5, 0.5, 2).coordinate_variance() == 0.5);
  CHECK_THROWS_AS(InitSpec::box(7, 5, 2), std::invalid_argument);
  // Particle j's initial position depends only on (seed, j).
  const auto small = initialize_ensemble(InitSpec::box(5, 7, 5), 10, 9);
  CHECK(small.positions == box.positions.topRows(10));
}

TEST_CASE("divergence detection") {
  Positions p(2, 1);
  p << -1e8, 1e8;
  SolverParams sp;
  sp.delta = 0.0;
  sp.dt = 30.0;
  CHECK_THROWS_AS(delta_cbo_em_update(make_ensemble(p), Vector::Zero(1), sp), DivergenceError);
}

TEST_CASE("run records iterations + 1 entries and stops on the rule") {
  const Objective obj = make_quadratic(2);
  SolverParams p = params_for(Scheme::consensus_freezing);
  p.alpha = 1e15;
  p.delta = 0.1;
  p.dt = 1.0;
  TerminationRule rule;
  rule.epsilon = 0.1;
  rule.consecutive = 3;
  rule.max_iterations = 200;
  rule.target = Vector::Zero(2);
  const auto trace = run(p, obj, InitSpec::box(1, 2, 2), rule, 5);
  CHECK(trace.status == RunStatus::converged);
  REQUIRE(trace.converged_at);
  CHECK(*trace.converged_at == trace.iterations());
  CHECK(static_cast<int>(trace.records.size()) == trace.iterations() + 1);
  int hits = 0;
  for (const auto& r : trace.records) hits = r.distance <= 0.1 ? hits + 1 : 0;
  CHECK(hits >= 3);
  // The rule fires on the m-th consecutive hit, not earlier.
  int run_len = 0;
  for (int k = 0; k < trace.iterations(); ++k) {
    run_len = trace.records[k].distance <= 0.1 ? run_len + 1 : 0;
    REQUIRE(run_len < 3);
  }

  rule.max_iterations = 2;
  const auto capped = run(p, obj, InitSpec::box(1, 2, 2), rule, 5);
  CHECK(capped.status == RunStatus::max_iter);
  CHECK(capped.records.size() == 3);

  rule.target = Vector();
  rule.max_iterations = 4;
  const auto open = run(p, obj, InitSpec::box(1, 2, 2), rule, 5);
  CHECK(open.status == RunStatus::max_iter);
  CHECK(std::isnan(open.records.back().distance));
}

TEST_CASE("a diverging run ends with status diverged and infinite variance") {
  const Objective obj = make_quadratic(1);
  SolverParams p = params_for(Scheme::delta_cbo_em);
  p.alpha = 0.0;
  p.dt = 100.0;
  TerminationRule rule;
  rule.target = Vector::Zero(1);
  const auto trace = run(p, obj, InitSpec::box(5, 7, 1), rule, 1);
  CHECK(trace.status == RunStatus::diverged);
  CHECK(!trace.diagnostic.empty());
  CHECK(std::isinf(trace.final_variance()));
}

TEST_CASE("runs are bit-identical across repeats and thread counts") {
  const Objective obj = make_ackley(3);
  for (auto scheme : {Scheme::cbo_em, Scheme::delta_cbo_em, Scheme::consensus_freezing,
                      Scheme::consensus_hopping}) {
    SolverParams p = params_for(scheme);
    p.n_particles = 300;
    p.sigma = 0.7;
    p.delta = 0.5;
    TerminationRule rule;
    rule.max_iterations = 15;
    rule.target = Vector::Zero(3);
    Positions last1, last8;
    p.threads = 1;
    const auto a = run(p, obj, InitSpec::box(1, 3, 3), rule, 99,
                       [&](const ParticleEnsemble& e, const Vector&) { last1 = e.positions; });
    p.threads = 8;
    const auto b = run(p, obj, InitSpec::box(1, 3, 3), rule, 99,
                       [&](const ParticleEnsemble& e, const Vector&) { last8 = e.positions; });
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t k = 0; k < a.records.size(); ++k) {
      REQUIRE(a.records[k].consensus == b.records[k].consensus);
      REQUIRE(a.records[k].empirical_variance == b.records[k].empirical_variance);
    }
    CHECK(last1 == last8);
  }
}

TEST_CASE("dimension mismatch between init and objective is rejected") {
  TerminationRule rule;
  CHECK_THROWS_AS(run(SolverParams{}, make_ackley(3), InitSpec::box(0, 1, 2), rule, 1),
                  std::invalid_argument);
}
