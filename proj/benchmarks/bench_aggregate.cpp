#include <benchmark/benchmark.h>

#include <vector>

#include "airfeel/fel.hpp"

using namespace airfeel;

static void BM_Aggregate(benchmark::State& state) {
  const auto mode = static_cast<AggregationMode>(state.range(0));
  SystemConfig cfg;
  cfg.devices = 20;
  cfg.subchannels = 63;
  cfg.antennas = static_cast<int>(state.range(1));
  Rng rng = derive_stream(4, {});
  std::uniform_real_distribution<double> law(-2.0, 2.0);
  std::vector<std::vector<double>> grads(20, std::vector<double>(63));
  for (auto& g : grads) {
    for (double& v : g) v = law(rng);
  }
  const std::vector<std::int64_t> sizes(20, 100);
  const PowerScaling scaling = select_beta(sizes, cfg);
  const codec::QuantizerSpec spec(cfg.order, 2.0);
  std::uint64_t round = 0;
  for (auto _ : state) {
    const auto out = aggregate(grads, mode, cfg, spec, scaling, {1, {0, 0, round++, 0}});
    benchmark::DoNotOptimize(out.grad_mse);
  }
  state.SetItemsProcessed(state.iterations() * cfg.subchannels);
}
BENCHMARK(BM_Aggregate)
    ->ArgNames({"mode", "nr"})
    ->Args({static_cast<int>(AggregationMode::kAwgn), 1})
    ->Args({static_cast<int>(AggregationMode::kFading), 10})
    ->Args({static_cast<int>(AggregationMode::kFading), 100})
    ->Args({static_cast<int>(AggregationMode::kAnalogFading), 100});
