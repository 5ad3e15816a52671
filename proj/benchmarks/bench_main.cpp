#include <benchmark/benchmark.h>

#include "belllab/analysis.hpp"
#include "belllab/pipeline.hpp"
#include "belllab/protocol.hpp"

using namespace belllab;

static void BM_PhiloxBlock(benchmark::State& state) {
  RngStream rng(1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(rng());
}
BENCHMARK(BM_PhiloxBlock);

static void BM_SingletTrials(benchmark::State& state) {
  const CouplingModel m = QuantumSingletModel(AngleAssignment::canonical(), 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(run_model_trials(m, state.range(0), 3));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SingletTrials)->Arg(1 << 16)->Arg(1 << 20)->Unit(benchmark::kMillisecond);

static void BM_PearleTrials(benchmark::State& state) {
  const CouplingModel m = make_pearle_like(AngleAssignment::canonical());
  for (auto _ : state) benchmark::DoNotOptimize(run_model_trials(m, state.range(0), 3));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PearleTrials)->Arg(1 << 16)->Unit(benchmark::kMillisecond);

static void BM_Tally(benchmark::State& state) {
  const auto trials = run_model_trials(QuantumSingletModel(AngleAssignment::canonical(), 1.0), 1 << 20, 3);
  for (auto _ : state) benchmark::DoNotOptimize(tally(trials));
  state.SetItemsProcessed(state.iterations() * trials.size());
}
BENCHMARK(BM_Tally)->Unit(benchmark::kMillisecond);

static void BM_SourceRun(benchmark::State& state) {
  SourceProtocolConfig cfg;
  cfg.pair_rate = static_cast<double>(state.range(0));
  cfg.jitter_sd = 1.0;
  cfg.dark_rate = {1000, 1000};
  const CouplingModel m = make_pearle_like(AngleAssignment::canonical());
  for (auto _ : state) benchmark::DoNotOptimize(run_source_experiment(cfg, m, 11));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SourceRun)->Arg(100000)->Unit(benchmark::kMillisecond);

static void BM_Match(benchmark::State& state) {
  SourceProtocolConfig cfg;
  cfg.pair_rate = 100000;
  cfg.jitter_sd = 1.0;
  const auto run = run_source_experiment(cfg, make_pearle_like(AngleAssignment::canonical()), 11);
  const auto strategy = state.range(0) == 0 ? MatchStrategy::kFixedLattice : MatchStrategy::kGreedyNearest;
  for (auto _ : state) benchmark::DoNotOptimize(match_coincidences(run.a, run.b, {10, strategy}));
  state.SetLabel(to_string(strategy));
}
BENCHMARK(BM_Match)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

static void BM_Feasibility(benchmark::State& state) {
  const auto p = pairwise_tables(QuantumSingletModel(AngleAssignment::canonical(), 0.6));
  for (auto _ : state) benchmark::DoNotOptimize(coupling_feasibility(p));
}
BENCHMARK(BM_Feasibility);

static void BM_ExactPearle(benchmark::State& state) {
  const CouplingModel m = make_pearle_like(AngleAssignment::canonical());
  for (auto _ : state) benchmark::DoNotOptimize(exact_chsh(m));
}
BENCHMARK(BM_ExactPearle)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
