#include <benchmark/benchmark.h>

#include "airfeel/airchannel.hpp"
#include "airfeel/random.hpp"

using namespace airfeel;

static void BM_FadingSubchannel(benchmark::State& state) {
  SystemConfig cfg;
  cfg.devices = static_cast<int>(state.range(0));
  cfg.antennas = static_cast<int>(state.range(1));
  Rng rng = derive_stream(3, {});
  ChannelRealization ch(cfg.devices, cfg.antennas);
  CVector s(static_cast<std::size_t>(cfg.devices), cplx(0.5, -0.5));
  for (auto _ : state) {
    resample_channel(cfg, rng, ch);
    benchmark::DoNotOptimize(combine(sum_beamformer(ch, cfg), apply_mac(s, ch)));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_FadingSubchannel)->Args({20, 10})->Args({20, 100})->Args({20, 800})->Args({200, 100});

static void BM_DeriveStream(benchmark::State& state) {
  std::uint64_t n = 0;
  for (auto _ : state) {
    Rng rng = derive_stream(7, {1, 2, 3, n++});
    benchmark::DoNotOptimize(rng());
  }
}
BENCHMARK(BM_DeriveStream);
