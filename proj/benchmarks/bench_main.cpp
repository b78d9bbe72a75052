#include <benchmark/benchmark.h>

#include <vector>

#include "consensus_opt/consensus.hpp"
#include "consensus_opt/dynamics.hpp"
#include "consensus_opt/metrics.hpp"
#include "consensus_opt/sampling.hpp"

using namespace consensus_opt;

namespace {

ParticleEnsemble box_ensemble(int n, int d) {
  return initialize_ensemble(InitSpec::box(5.0, 7.0, d), n, 1);
}

void BM_Philox(benchmark::State& state) {
  std::uint32_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(random_block({1, i++, 0, 0}));
}
BENCHMARK(BM_Philox);

void BM_GaussianFill(benchmark::State& state) {
  std::vector<double> out(static_cast<std::size_t>(state.range(0)));
  std::uint32_t i = 0;
  for (auto _ : state) {
    gaussian_fill({1, i++, 0, 0}, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GaussianFill)->Arg(2)->Arg(64);

void BM_Softmin(benchmark::State& state) {
  const auto ens = box_ensemble(static_cast<int>(state.range(0)), 5);
  const auto values = evaluate(ens, make_ackley(5));
  for (auto _ : state) benchmark::DoNotOptimize(softmin_weights(values, 1e15));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Softmin)->Arg(100)->Arg(5000);

void BM_ConsensusPoint(benchmark::State& state) {
  const auto ens = box_ensemble(static_cast<int>(state.range(0)), 5);
  const auto values = evaluate(ens, make_ackley(5));
  for (auto _ : state) benchmark::DoNotOptimize(consensus_point(ens.positions, values, 1e15));
}
BENCHMARK(BM_ConsensusPoint)->Arg(100)->Arg(5000);

void BM_AckleyEvaluate(benchmark::State& state) {
  const auto ens = box_ensemble(5000, 5);
  const Objective obj = make_ackley(5);
  for (auto _ : state) benchmark::DoNotOptimize(evaluate(ens, obj));
  state.SetItemsProcessed(state.iterations() * 5000);
}
BENCHMARK(BM_AckleyEvaluate);

void BM_Step(benchmark::State& state) {
  SolverParams p;
  p.scheme = static_cast<Scheme>(state.range(0));
  p.threads = static_cast<int>(state.range(1));
  const Objective obj = make_ackley(5);
  const auto ens = box_ensemble(p.n_particles, 5);
  for (auto _ : state) {
    if (p.scheme == Scheme::delta_cbo_em)
      benchmark::DoNotOptimize(step_delta_cbo_em(ens, p, obj));
    else
      benchmark::DoNotOptimize(step_consensus_freezing(ens, p, obj));
  }
}
BENCHMARK(BM_Step)
    ->ArgNames({"scheme", "threads"})
    ->Args({static_cast<int>(Scheme::delta_cbo_em), 1})
    ->Args({static_cast<int>(Scheme::consensus_freezing), 1})
    ->Args({static_cast<int>(Scheme::consensus_freezing), 4})
    ->Unit(benchmark::kMillisecond);

void BM_EmpiricalW2(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto a = gaussian_cloud(Vector::Zero(2), 0.5, n, 1, 0);
  const auto b = gaussian_cloud(Vector::Zero(2), 0.5, n, 2, 0);
  for (auto _ : state) benchmark::DoNotOptimize(empirical_w2(a.positions, b.positions));
}
BENCHMARK(BM_EmpiricalW2)->Arg(100)->Arg(512)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
