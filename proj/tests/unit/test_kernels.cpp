#include <omp.h>

#include "doctest.h"
#include "support.hpp"

#include "sysrisk/kernels.hpp"
#include "sysrisk/propagation.hpp"

using namespace sysrisk;

namespace {

DenseMatrix random_matrix(std::size_t n, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  DenseMatrix m(n);
  for (double& v : m.data()) v = uniform01(rng) * 1.8 / static_cast<double>(n);
  return m;
}

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
  Rng rng = make_rng(seed, 1);
  std::vector<double> v(n);
  for (double& x : v) x = uniform01(rng);
  return v;
}

// Forces several threads even on a single core so the parallel path runs.
struct ThreadGuard {
  int saved = omp_get_max_threads();
  explicit ThreadGuard(int n) { omp_set_num_threads(n); }
  ~ThreadGuard() { omp_set_num_threads(saved); }
};

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("parallel kernels are bit-identical to the serial reference") {
  ThreadGuard threads(4);
  for (std::size_t n : {5u, 127u, 128u, 200u, 301u}) {
    const DenseMatrix m = random_matrix(n, n);
    const auto x = random_vector(n, n);
    std::vector<double> y1(n), y2(n);

    kernels::serial::matvec(m, x, y1);
    kernels::matvec(m, x, y2);
    CHECK(y1 == y2);

    kernels::serial::vecmat(x, m, y1);
    kernels::vecmat(x, m, y2);
    CHECK(y1 == y2);

    CHECK(kernels::serial::series_terms(m, x, 30) == kernels::series_terms(m, x, 30));
    CHECK(kernels::serial::series_sum(m, x, 30) == kernels::series_sum(m, x, 30));
    kernels::SeriesWorkspace ws(n);
    CHECK(ws.series_sum(m, x, 30) == kernels::serial::series_sum(m, x, 30));
  }
}

TEST_CASE("series terms match explicit matrix powers") {
  auto bs = testing::pareto_banks(9, 4);
  const LambdaMatrix lm = lambda_from_exposures(testing::random_feasible(bs, 200, 4));
  const auto fast = kernels::series_terms(lm.values(), lm.equity_share(), 25);
  const auto slow = testing::naive_series_terms(lm, 25);
  for (std::size_t t = 0; t < fast.size(); ++t)
    CHECK(fast[t] == doctest::Approx(slow[t]).epsilon(1e-13));
}

TEST_CASE("matvec and vecmat agree with the transpose") {
  const DenseMatrix m = random_matrix(17, 3);
  const auto x = random_vector(17, 3);
  std::vector<double> y1(17), y2(17);
  kernels::matvec(m, x, y1);
  kernels::vecmat(x, m.transposed(), y2);
  for (std::size_t i = 0; i < 17; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-14));
}

TEST_CASE("no-bankruptcy sampler is independent of the thread count") {
  ThreadGuard threads(3);
  auto bs = testing::pareto_banks(6, 8);
  const LambdaMatrix lm = lambda_from_exposures(testing::random_feasible(bs, 100, 8));
  const auto a = sample_no_bankruptcy_shocks(lm, 5000, 77);
  const auto b = serial::sample_no_bankruptcy_shocks(lm, 5000, 77);
  CHECK(a.min == b.min);
  CHECK(a.max == b.max);
  CHECK(a.mean == b.mean);
  CHECK(a.feasible_fraction == b.feasible_fraction);
}

}  // TEST_SUITE
