// Serial reference vs OpenMP versions of the data-parallel kernels.
//
//   ./build/bench/bench_kernels --benchmark_filter=Simulate
//
// Thread count follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "optdiff/kernels.hpp"

namespace k = optdiff::kernels;

namespace {

// Symmetrised generator of the OU process on a uniform grid; a realistic
// tridiagonal for the eigenvalue kernels.
void ou_tridiagonal(std::size_t n, std::vector<double>& diag, std::vector<double>& off) {
  const double lo = -8.0, hi = 8.0, h = (hi - lo) / static_cast<double>(n);
  std::vector<double> x(n), w(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = lo + (static_cast<double>(i) + 0.5) * h;
    w[i] = std::exp(-0.5 * x[i] * x[i]) * h;
  }
  diag.assign(n, 0.0);
  off.assign(n - 1, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double face = 0.5 * (w[i] + w[i + 1]) / h;
    diag[i] += face / (h * w[i]) * h;
    diag[i + 1] += face / (h * w[i + 1]) * h;
    off[i] = -face / std::sqrt(w[i] * w[i + 1]);
  }
}

k::PathSpec ou_paths(std::size_t steps) {
  return {[](double x) { return -x; }, [](double) { return 1.0; }, -INFINITY, INFINITY, true, 1e-3, steps, 0, 10};
}

template <class Fn>
void bisect(benchmark::State& state, Fn fn) {
  std::vector<double> d, e;
  ou_tridiagonal(static_cast<std::size_t>(state.range(0)), d, e);
  for (auto _ : state) benchmark::DoNotOptimize(fn(d, e, 16));
}

template <class Fn>
void tabulate(benchmark::State& state, Fn fn) {
  std::vector<double> xs(static_cast<std::size_t>(state.range(0)));
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = static_cast<double>(i) / static_cast<double>(xs.size());
  const std::function<double(double)> f = [](double x) { return std::exp(-x) * std::log1p(x) * std::cos(3.0 * x); };
  for (auto _ : state) benchmark::DoNotOptimize(fn(f, xs));
}

template <class Fn>
void simulate(benchmark::State& state, Fn fn) {
  const auto spec = ou_paths(20000);
  const std::vector<double> x0(static_cast<std::size_t>(state.range(0)), 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(fn(spec, x0, 7));
  state.SetItemsProcessed(state.iterations() * state.range(0) * 20000);
}

template <class Fn>
void autocov(benchmark::State& state, Fn fn) {
  const auto spec = ou_paths(200000);
  const auto paths = k::serial::simulate_paths(spec, std::vector<double>(4, 0.0), 11);
  std::vector<std::vector<double>> series;
  for (const auto& p : paths) series.push_back(p.samples);
  for (auto _ : state) benchmark::DoNotOptimize(fn(series, 0.0, static_cast<std::size_t>(state.range(0))));
}

void BM_BisectSerial(benchmark::State& s) { bisect(s, k::serial::bisect_eigenvalues); }
void BM_BisectParallel(benchmark::State& s) { bisect(s, k::parallel::bisect_eigenvalues); }
void BM_TabulateSerial(benchmark::State& s) { tabulate(s, k::serial::tabulate); }
void BM_TabulateParallel(benchmark::State& s) { tabulate(s, k::parallel::tabulate); }
void BM_SimulateSerial(benchmark::State& s) { simulate(s, k::serial::simulate_paths); }
void BM_SimulateParallel(benchmark::State& s) { simulate(s, k::parallel::simulate_paths); }
void BM_AutocovSerial(benchmark::State& s) { autocov(s, k::serial::autocovariance); }
void BM_AutocovParallel(benchmark::State& s) { autocov(s, k::parallel::autocovariance); }

}  // namespace

BENCHMARK(BM_BisectSerial)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BisectParallel)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TabulateSerial)->Arg(1 << 14)->Arg(1 << 18);
BENCHMARK(BM_TabulateParallel)->Arg(1 << 14)->Arg(1 << 18);
BENCHMARK(BM_SimulateSerial)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SimulateParallel)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AutocovSerial)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AutocovParallel)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
