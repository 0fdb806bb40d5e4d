#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "histoband/bands.hpp"
#include "histoband/binomial_oracle.hpp"
#include "histoband/estimators.hpp"
#include "histoband/grid.hpp"
#include "histoband/rng.hpp"
#include "histoband/scenario.hpp"

namespace {

histoband::GeneratedSample make_sample(int dim, std::uint64_t inv_mesh,
                                       std::size_t n) {
  histoband::ScenarioConfig config;
  config.dim = dim;
  config.inv_mesh = inv_mesh;
  config.n = n;
  return histoband::generate(config, histoband::Grid(dim, inv_mesh), 0);
}

void BM_Fit(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const std::size_t n = static_cast<std::size_t>(state.range(1));
  const std::uint64_t inv = 10;
  const histoband::Grid grid(dim, inv);
  const histoband::GeneratedSample sample = make_sample(dim, inv, n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(histoband::fit(grid, sample.data));
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(n));
}
BENCHMARK(BM_Fit)->Args({1, 100000})->Args({2, 100000})->Args({3, 100000});

void BM_CellLookup(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const histoband::Grid grid(dim, 16);
  const histoband::GeneratedSample sample = make_sample(dim, 16, 4096);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(grid.cell_index_of(sample.data.x(i)));
    i = (i + 1) & 4095;
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_CellLookup)->Arg(1)->Arg(3)->Arg(8);

void BM_GaussianMaxQuantile(benchmark::State& state) {
  const std::uint64_t cells = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        histoband::gaussian_max_quantile({cells, 0.05}));
  }
}
BENCHMARK(BM_GaussianMaxQuantile)->Arg(10)->Arg(10000)->Arg(10000000);

void BM_PhiloxNormal(benchmark::State& state) {
  histoband::PhiloxStream stream(42, 0, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(stream.normal());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_PhiloxNormal);

void BM_BinomialCentralMoment(benchmark::State& state) {
  const std::int64_t n = state.range(0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        histoband::central_moment_exact({n, 0.1, 4}));
  }
}
BENCHMARK(BM_BinomialCentralMoment)->Arg(100)->Arg(3200)->Arg(100000);

void BM_BuildBand(benchmark::State& state) {
  const std::size_t n = 100000;
  const histoband::Grid grid(2, 10);
  const histoband::GeneratedSample sample = make_sample(2, 10, n);
  const histoband::HistogramFit cells = histoband::fit(grid, sample.data);
  const histoband::TauModel tau =
      histoband::tau_plugin(cells, histoband::local_variance(cells));
  for (auto _ : state) {
    benchmark::DoNotOptimize(histoband::build_band(cells, tau, 0.1));
  }
}
BENCHMARK(BM_BuildBand);

}  // namespace

BENCHMARK_MAIN();
