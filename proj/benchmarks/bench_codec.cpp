#include <benchmark/benchmark.h>

#include <complex>
#include <vector>

#include "airfeel/codec.hpp"
#include "airfeel/random.hpp"

using namespace airfeel;

static void BM_QuantizeEncode(benchmark::State& state) {
  const int q = static_cast<int>(state.range(0));
  const codec::QuantizerSpec spec(q, 1.0);
  Rng rng = derive_stream(1, {});
  std::uniform_real_distribution<double> law(-1.2, 1.2);
  std::vector<double> g(4096);
  for (double& v : g) v = law(rng);
  for (auto _ : state) {
    std::complex<double> acc{};
    for (double v : g) acc += codec::encode(codec::quantize(v, spec), q).value();
    benchmark::DoNotOptimize(acc);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g.size()));
}
BENCHMARK(BM_QuantizeEncode)->Arg(4)->Arg(256)->Arg(4096);

static void BM_DecodeSum(benchmark::State& state) {
  const int q = static_cast<int>(state.range(0));
  const int k = static_cast<int>(state.range(1));
  Rng rng = derive_stream(2, {});
  std::normal_distribution<double> n(0.0, 0.3);
  std::uniform_int_distribution<int> level(0, q - 1);
  std::vector<std::complex<double>> received(4096);
  for (auto& r : received) {
    for (int d = 0; d < k; ++d) r += codec::encode(level(rng), q).value();
    r += std::complex<double>(n(rng), n(rng));
  }
  for (auto _ : state) {
    std::int64_t total = 0;
    for (const auto& r : received) total += codec::decode_sum(r, k, q).value;
    benchmark::DoNotOptimize(total);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(received.size()));
}
BENCHMARK(BM_DecodeSum)->Args({16, 20})->Args({256, 20})->Args({256, 400});
