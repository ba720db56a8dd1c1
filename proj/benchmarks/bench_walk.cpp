#include <benchmark/benchmark.h>

#include "bts/bounds.hpp"
#include "bts/chain.hpp"
#include "bts/exact.hpp"
#include "bts/marking.hpp"

namespace {

void BM_WalkStep(benchmark::State& state) {
  const auto profile = bts::BiasProfile::make(static_cast<std::size_t>(state.range(0)), 0.5);
  auto deck = bts::DeckState::identity(profile.deck_size());
  auto rng = bts::trial_rng(1, 0);
  std::uint64_t t = 0;
  for (auto _ : state) benchmark::DoNotOptimize(bts::step(deck, profile, rng, ++t));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_WalkStep)->Arg(4)->Arg(512);

void BM_OperatorApply(benchmark::State& state) {
  const auto op = bts::build_operator(bts::BiasProfile::make(4, 0.5));
  auto dist = bts::point_mass(op.state_count());
  std::vector<double> out(dist.size());
  for (auto _ : state) {
    op.apply(dist, out);
    dist.swap(out);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(op.state_count()));
}
BENCHMARK(BM_OperatorApply)->Unit(benchmark::kMillisecond);

void BM_FullMarkingRun(benchmark::State& state) {
  const auto profile = bts::BiasProfile::make(static_cast<std::size_t>(state.range(0)), 0.5);
  bts::MarkingOptions opts;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    auto rng = bts::trial_rng(7, seed++);
    benchmark::DoNotOptimize(bts::run_to_full_marking(profile, opts, rng).t_full);
  }
}
BENCHMARK(BM_FullMarkingRun)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_LowerBoundTrials(benchmark::State& state) {
  const auto profile = bts::BiasProfile::make(512, 0.5);
  const std::vector<std::uint64_t> grid{7100};
  for (auto _ : state)
    benchmark::DoNotOptimize(bts::simulate_A_K_curve(profile, grid, 6, 100, 3, 1));
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_LowerBoundTrials)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
