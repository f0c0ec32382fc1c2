// Parallel ensemble kernel against the path-by-path serial reference.

#include <benchmark/benchmark.h>

#include "thetaem/lab.hpp"
#include "thetaem/models.hpp"

namespace {

using namespace thetaem;

const PolyModelParams kParams{-2.0, -2.0, 2.0, 3.0, 2.0};
const double kX0[] = {1.0};

SchemeConfig config(double theta) {
  SchemeConfig c;
  c.theta = theta;
  c.dt = 0.01;
  c.seed = 1;
  return c;
}

void BM_Serial(benchmark::State& state) {
  const auto m = make_poly_model(kParams);
  const auto cfg = config(state.range(1) / 10.0);
  for (auto _ : state) {
    auto s = estimate_moments_serial(*m, kX0, cfg, 500, static_cast<std::uint64_t>(state.range(0)));
    benchmark::DoNotOptimize(s.moment.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 500);
}

void BM_Parallel(benchmark::State& state) {
  const auto m = make_poly_model(kParams);
  const auto cfg = config(state.range(1) / 10.0);
  const EnsembleOptions opt{static_cast<int>(state.range(2))};
  for (auto _ : state) {
    auto s = estimate_moments(*m, kX0, cfg, 500, static_cast<std::uint64_t>(state.range(0)), opt);
    benchmark::DoNotOptimize(s.moment.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 500);
}

}  // namespace

// args: paths, 10·θ[, workers]
BENCHMARK(BM_Serial)->Args({2000, 0})->Args({2000, 10})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Parallel)
    ->Args({2000, 0, 1})
    ->Args({2000, 10, 1})
    ->Args({2000, 10, 2})
    ->Args({2000, 10, 4})
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
