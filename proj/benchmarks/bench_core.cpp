#include <benchmark/benchmark.h>

#include "intent_lab/equilibrium.hpp"
#include "intent_lab/rng.hpp"

using namespace intent_lab;

static void BM_FpaSolve(benchmark::State& state) {
  FpaOptions o;
  o.grid_size = static_cast<int>(state.range(0));
  const auto a = TypeDistribution::uniform(1.5, 4.5);
  const auto b = TypeDistribution::uniform(1.5, 3.0);
  for (auto _ : state) benchmark::DoNotOptimize(solve_asymmetric_fpa(a, b, o).max_bid);
}
BENCHMARK(BM_FpaSolve)->Arg(128)->Arg(512)->Arg(2048);

static void BM_Settle(benchmark::State& state) {
  const MarketParams p;
  const auto kind = static_cast<MechanismKind>(state.range(0));
  std::vector<BidProfile> profiles;
  CounterRng rng(1, 0);
  for (int i = 0; i < 1024; ++i)
    profiles.push_back({{rng.uniform(0, 3), rng.uniform(0, 3), rng.uniform(0, 4), rng.uniform(0, 4)},
                        {rng.uniform(0, 3), rng.uniform(0, 3), rng.uniform(0, 4), rng.uniform(0, 4)}});
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(settle(kind, p, profiles[i & 1023]).path);
    ++i;
  }
  state.SetLabel(to_string(kind));
}
BENCHMARK(BM_Settle)->DenseRange(0, 4);

static void BM_ExpectedPayoffBatch(benchmark::State& state) {
  const MarketParams p;
  const EquilibriumResult eq = batch_equilibrium(p, uniform_types(p));
  const SolverBid bid = eq.strategies[0](2.0);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        expected_payoff(p, MechanismKind::BatchAuction, eq.strategies[1], SolverId::One, 2.0, bid));
}
BENCHMARK(BM_ExpectedPayoffBatch);

static void BM_VerifyBatch(benchmark::State& state) {
  const MarketParams p;
  const EquilibriumResult eq = batch_equilibrium(p, uniform_types(p));
  VerifyOptions v;
  v.bid_resolution = static_cast<int>(state.range(0));
  v.type_points = 2;
  for (auto _ : state)
    benchmark::DoNotOptimize(verify_epsilon_nash(p, MechanismKind::BatchAuction, eq.strategies, 1e-3, v).max_gain);
}
BENCHMARK(BM_VerifyBatch)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
