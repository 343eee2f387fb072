// Serial reference kernels against the OpenMP/FFTW library kernels.
// Library benchmarks take the thread count as their argument.
#include <benchmark/benchmark.h>
#include <omp.h>

#include <random>

#include "mdobf/reference.hpp"

using namespace mdobf;

namespace {

std::vector<cplx> noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> d;
  std::vector<cplx> v(n);
  for (auto& x : v) x = {d(g), d(g)};
  return v;
}

SymbolGrid random_grid(std::size_t n, std::size_t m) {
  const auto v = noise(n * m, 1);
  SymbolGrid g(n, m);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t b = 0; b < n; ++b) g.at(b, j) = v[j * n + b];
  return g;
}

ScenarioConfig bench_scenario() {
  ScenarioConfig c = load_scenario("{}");
  c.duration_s = 0.1;
  return c;
}

void set_threads(const benchmark::State& s) { omp_set_num_threads(static_cast<int>(s.range(0))); }

constexpr std::size_t kSymbols = 2000;

void BM_ModulateReference(benchmark::State& s) {
  const SymbolGrid g = random_grid(64, kSymbols);
  for (auto _ : s) benchmark::DoNotOptimize(reference::ofdm_modulate(g, 16, 20e6));
  s.SetItemsProcessed(s.iterations() * static_cast<std::int64_t>(kSymbols));
}

void BM_Modulate(benchmark::State& s) {
  set_threads(s);
  const SymbolGrid g = random_grid(64, kSymbols);
  for (auto _ : s) benchmark::DoNotOptimize(ofdm_modulate(g, 16, 20e6));
  s.SetItemsProcessed(s.iterations() * static_cast<std::int64_t>(kSymbols));
}

void BM_StftReference(benchmark::State& s) {
  const auto x = noise(4000, 2);
  const StftSettings st{256, 64, 1024, WindowKind::kHann};
  for (auto _ : s) benchmark::DoNotOptimize(reference::stft(x, 2000.0, st));
}

void BM_Stft(benchmark::State& s) {
  set_threads(s);
  const auto x = noise(4000, 2);
  const StftSettings st{256, 64, 1024, WindowKind::kHann};
  for (auto _ : s) benchmark::DoNotOptimize(stft(x, 2000.0, st));
}

void BM_PropagateFastReference(benchmark::State& s) {
  const ScenarioConfig cfg = bench_scenario();
  const ChannelRealization chan = build_channel(cfg);
  const BasebandSignal tx = known_symbol_stream(cfg, kSymbols).signal;
  for (auto _ : s) benchmark::DoNotOptimize(reference::propagate_fast(tx, chan, 64, 16));
  s.SetItemsProcessed(s.iterations() * static_cast<std::int64_t>(tx.samples.size()));
}

void BM_PropagateFast(benchmark::State& s) {
  set_threads(s);
  const ScenarioConfig cfg = bench_scenario();
  const ChannelRealization chan = build_channel(cfg);
  const BasebandSignal tx = known_symbol_stream(cfg, kSymbols).signal;
  for (auto _ : s) benchmark::DoNotOptimize(propagate(tx, chan, {ChannelMode::kFast, 64, 16, 32}));
  s.SetItemsProcessed(s.iterations() * static_cast<std::int64_t>(tx.samples.size()));
}

void BM_PropagateExactReference(benchmark::State& s) {
  const ScenarioConfig cfg = bench_scenario();
  const ChannelRealization chan = build_channel(cfg);
  const BasebandSignal tx{noise(4000, 3), 20e6, 0.0};
  for (auto _ : s) benchmark::DoNotOptimize(reference::propagate_exact(tx, chan, 32));
  s.SetItemsProcessed(s.iterations() * static_cast<std::int64_t>(tx.samples.size()));
}

void BM_PropagateExact(benchmark::State& s) {
  set_threads(s);
  const ScenarioConfig cfg = bench_scenario();
  const ChannelRealization chan = build_channel(cfg);
  const BasebandSignal tx{noise(4000, 3), 20e6, 0.0};
  for (auto _ : s) benchmark::DoNotOptimize(propagate(tx, chan, {ChannelMode::kExact, 64, 16, 32}));
  s.SetItemsProcessed(s.iterations() * static_cast<std::int64_t>(tx.samples.size()));
}

void BM_ProductDecimateReference(benchmark::State& s) {
  const auto rx = noise(2'000'000, 4), ref = noise(2'000'000, 5);
  for (auto _ : s) benchmark::DoNotOptimize(reference::reference_product_decimate(rx, ref, 10'000));
}

void BM_ProductDecimate(benchmark::State& s) {
  set_threads(s);
  const auto rx = noise(2'000'000, 4), ref = noise(2'000'000, 5);
  for (auto _ : s) benchmark::DoNotOptimize(reference_product_decimate(rx, ref, 10'000));
}

void threads(benchmark::internal::Benchmark* b) {
  const int hw = omp_get_num_procs();
  for (int t = 1; t < hw; t *= 2) b->Arg(t);
  b->Arg(hw);
}

}  // namespace

BENCHMARK(BM_ModulateReference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Modulate)->Apply(threads)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_StftReference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Stft)->Apply(threads)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_PropagateFastReference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PropagateFast)->Apply(threads)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_PropagateExactReference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PropagateExact)->Apply(threads)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ProductDecimateReference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ProductDecimate)->Apply(threads)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
