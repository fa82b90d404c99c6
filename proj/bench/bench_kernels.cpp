// Serial reference vs OpenMP kernels. Set OMP_NUM_THREADS to compare thread
// counts; below kernels::kParallelThreshold both paths are the same code.

#include <benchmark/benchmark.h>

#include "sysrisk/generators.hpp"
#include "sysrisk/kernels.hpp"
#include "sysrisk/optimizer.hpp"
#include "sysrisk/propagation.hpp"
#include "sysrisk/random.hpp"

using namespace sysrisk;

namespace {

DenseMatrix random_lambda(std::size_t n) {
  Rng rng = make_rng(n);
  DenseMatrix m(n);
  for (double& v : m.data()) v = uniform01(rng) * 1.6 / static_cast<double>(n);
  return m;
}

std::vector<double> weights(std::size_t n) { return std::vector<double>(n, 1.0 / n); }

void BM_SeriesSerial(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const DenseMatrix m = random_lambda(n);
  const auto w = weights(n);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::serial::series_sum(m, w, 50));
  st.SetItemsProcessed(st.iterations() * 50 * static_cast<std::int64_t>(n * n));
}

void BM_SeriesParallel(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const DenseMatrix m = random_lambda(n);
  const auto w = weights(n);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::series_sum(m, w, 50));
  st.SetItemsProcessed(st.iterations() * 50 * static_cast<std::int64_t>(n * n));
}

void BM_MatvecSerial(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const DenseMatrix m = random_lambda(n);
  const auto x = weights(n);
  std::vector<double> y(n);
  for (auto _ : st) {
    kernels::serial::matvec(m, x, y);
    benchmark::DoNotOptimize(y.data());
  }
}

void BM_MatvecParallel(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const DenseMatrix m = random_lambda(n);
  const auto x = weights(n);
  std::vector<double> y(n);
  for (auto _ : st) {
    kernels::matvec(m, x, y);
    benchmark::DoNotOptimize(y.data());
  }
}

LambdaMatrix sampler_input() {
  PopulationSpec spec;
  spec.n_banks = 30;
  auto bs = std::make_shared<const BankSet>(generate_population(spec));
  return lambda_from_exposures(initial_feasible_matrix(bs));
}

void BM_SamplerSerial(benchmark::State& st) {
  const LambdaMatrix lm = sampler_input();
  for (auto _ : st) benchmark::DoNotOptimize(serial::sample_no_bankruptcy_shocks(lm, 20000, 1));
}

void BM_SamplerParallel(benchmark::State& st) {
  const LambdaMatrix lm = sampler_input();
  for (auto _ : st) benchmark::DoNotOptimize(sample_no_bankruptcy_shocks(lm, 20000, 1));
}

}  // namespace

BENCHMARK(BM_SeriesSerial)->Arg(30)->Arg(128)->Arg(256)->Arg(512);
BENCHMARK(BM_SeriesParallel)->Arg(30)->Arg(128)->Arg(256)->Arg(512);
BENCHMARK(BM_MatvecSerial)->Arg(128)->Arg(512);
BENCHMARK(BM_MatvecParallel)->Arg(128)->Arg(512);
BENCHMARK(BM_SamplerSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SamplerParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
