#include "doctest.h"
#include "support.hpp"

#include "sysrisk/analytic.hpp"
#include "sysrisk/error.hpp"
#include "sysrisk/propagation.hpp"

using namespace sysrisk;
using doctest::Approx;

namespace {

LambdaMatrix two_bank_half() {
  DenseMatrix m(2);
  m(0, 1) = 0.5;
  m(1, 0) = 0.5;
  return LambdaMatrix(m, {0.5, 0.5});
}

LambdaMatrix subcritical(std::size_t n, std::uint64_t seed) {
  auto bs = testing::pareto_banks(n, seed, 0.3, 0.85);
  return lambda_from_exposures(testing::random_feasible(bs, 50 * static_cast<int>(n * n), seed));
}

}  // namespace

TEST_SUITE("propagation") {

TEST_CASE("zero shock stays zero") {
  const auto r = propagate(subcritical(5, 1), std::vector<double>(5, 0.0), 20);
  REQUIRE(r.states.size() == 20);
  for (const auto& s : r.states) {
    CHECK(s.aggregate == 0.0);
    for (double v : s.h) CHECK(v == 0.0);
  }
}

TEST_CASE("no network means no amplification") {
  const LambdaMatrix lm(DenseMatrix(3), {0.2, 0.3, 0.5});
  const auto r = propagate(lm, std::vector<double>(3, 0.01), 10);
  for (const auto& s : r.states) {
    CHECK(s.aggregate == Approx(0.01));
    for (double v : s.h) CHECK(v == 0.01);
  }
  const auto hinf = h_infinity_exact(lm, std::vector<double>{0.1, 0.2, 0.3});
  CHECK(hinf == std::vector<double>{0.1, 0.2, 0.3});
}

TEST_CASE("two banks at constant leverage 0.5 double the shock") {
  const double psi = 0.01;
  const auto r = propagate(two_bank_half(), std::vector<double>{psi, psi}, 80);
  CHECK(r.states.back().aggregate / psi == Approx(2.0).epsilon(1e-14));
  for (double v : h_infinity_exact(two_bank_half(), std::vector<double>{psi, psi}))
    CHECK(v / psi == Approx(2.0).epsilon(1e-14));
}

TEST_CASE("h(t) follows the explicit power sum") {
  const LambdaMatrix lm = subcritical(6, 2);
  std::vector<double> h1 = {0.01, 0.0, 0.05, 0.02, 0.0, 0.03};
  const auto r = propagate(lm, h1, 8);
  std::vector<double> v = h1, acc = h1;
  for (int t = 1; t <= 8; ++t) {
    const auto& s = r.states[static_cast<std::size_t>(t - 1)];
    CHECK(s.t == t);
    CHECK(testing::max_abs_diff(s.h, acc) < 1e-15);
    double agg = 0.0;
    for (std::size_t i = 0; i < 6; ++i) agg += s.h[i] * lm.equity_share()[i];
    CHECK(s.aggregate == Approx(agg).epsilon(1e-14));
    std::vector<double> next(6, 0.0);
    for (std::size_t i = 0; i < 6; ++i)
      for (std::size_t j = 0; j < 6; ++j) next[i] += lm(i, j) * v[j];
    v = next;
    for (std::size_t i = 0; i < 6; ++i) acc[i] += v[i];
  }
}

TEST_CASE("monotone, linear, and within the geometric bound of h_infinity") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const LambdaMatrix lm = subcritical(7, seed);
    const double lambda = spectral_radius(lm);
    REQUIRE(lambda < 0.95);
    Rng rng = make_rng(seed, 3);
    std::vector<double> h1(7);
    for (double& x : h1) x = 0.1 * uniform01(rng);
    const int t_max = 60;
    const auto r = propagate(lm, h1, t_max);
    for (std::size_t t = 1; t < r.states.size(); ++t)
      for (std::size_t i = 0; i < 7; ++i) CHECK(r.states[t].h[i] >= r.states[t - 1].h[i]);

    std::vector<double> scaled = h1;
    for (double& x : scaled) x *= 3.5;
    const auto r3 = propagate(lm, scaled, t_max);
    for (std::size_t i = 0; i < 7; ++i)
      CHECK(r3.states.back().h[i] == Approx(3.5 * r.states.back().h[i]).epsilon(1e-14));

    const auto hinf = h_infinity_exact(lm, h1);
    const double h1max = *std::max_element(h1.begin(), h1.end());
    // Σ_{s≥t} λ^s with a slack for the non-normal transient.
    const double bound = 10.0 * h1max * std::pow(lambda, t_max) / (1.0 - lambda);
    CHECK(testing::max_abs_diff(r.states.back().h, hinf) <= bound + 1e-15);
  }
}

TEST_CASE("bankruptcy is flagged without clamping") {
  const auto r = propagate(two_bank_half(), std::vector<double>{0.8, 0.0}, 10);
  CHECK(r.bankrupt[0]);
  CHECK_FALSE(r.bankrupt[1]);
  CHECK(r.states.back().h[0] > 1.0);
}

TEST_CASE("divergent propagation stops at the last finite state") {
  TwoTypeModel m{5, 50, 2.0, 0.5, 0.0, 1.0};
  const LambdaMatrix lm = two_type_lambda_matrix(m);
  const auto r = propagate(lm, std::vector<double>(55, 0.01), 1000);
  CHECK(r.overflowed);
  CHECK(r.states.size() < 1000);
  for (double v : r.states.back().h) CHECK(std::abs(v) <= kDivergenceGuard);
  CHECK_THROWS_AS(h_infinity_exact(lm, std::vector<double>(55, 0.01)), Error);
  try {
    h_infinity_exact(lm, std::vector<double>(55, 0.01));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kSupercriticalSystem);
  }
}

TEST_CASE("two-type assortative block: low-leverage block alone doubles the shock") {
  TwoTypeModel m{5, 50, 0.9, 0.5, 0.0, 1.0};
  const auto hinf = h_infinity_exact(two_type_lambda_matrix(m), std::vector<double>(55, 1e-3));
  for (std::size_t i = 5; i < 55; ++i) CHECK(hinf[i] / 1e-3 == Approx(2.0).epsilon(1e-12));
  for (std::size_t i = 0; i < 5; ++i) CHECK(hinf[i] / 1e-3 == Approx(10.0).epsilon(1e-12));
}

TEST_CASE("propagation rejects invalid arguments") {
  CHECK_THROWS_AS(propagate(two_bank_half(), std::vector<double>{-0.1, 0.0}, 5), Error);
  CHECK_THROWS_AS(propagate(two_bank_half(), std::vector<double>{0.1, 0.0}, 0), Error);
  CHECK_THROWS_AS(propagate(two_bank_half(), std::vector<double>{0.1}, 5), Error);
}

TEST_CASE("initial shock from target inverts h_infinity") {
  const LambdaMatrix zero(DenseMatrix(3), {0.3, 0.3, 0.4});
  CHECK(initial_shock_from_target(zero, std::vector<double>{0.2, 0.5, 0.7}).h1 ==
        std::vector<double>{0.2, 0.5, 0.7});
  for (double v : initial_shock_from_target(subcritical(4, 1), std::vector<double>(4, 0.0)).h1)
    CHECK(v == 0.0);

  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const LambdaMatrix lm = subcritical(10, seed);
    Rng rng = make_rng(seed, 9);
    std::vector<double> target(10);
    for (double& x : target) x = uniform01(rng);
    const auto shock = initial_shock_from_target(lm, target);
    CHECK(testing::max_abs_diff(h_infinity_exact(lm, shock.h1), target) < 1e-10);
    for (std::size_t i = 0; i < 10; ++i) CHECK(shock.feasible[i] == (shock.h1[i] >= 0.0));
  }
}

TEST_CASE("sampler ranges without links and with links") {
  const LambdaMatrix zero(DenseMatrix(2), {0.5, 0.5});
  const auto r = sample_no_bankruptcy_shocks(zero, 20000, 1);
  CHECK(r.feasible_fraction == 1.0);
  CHECK(r.samples == 20000);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(r.min[i] >= 0.0);
    CHECK(r.min[i] < 1e-3);
    CHECK(r.max[i] < 1.0);
    CHECK(r.max[i] > 0.999);
    CHECK(r.mean[i] == Approx(0.5).epsilon(0.02));
  }

  // A larger rerun can only widen the empirical ranges; the small run's
  // ranges must lie inside it and be close to its edges.
  const LambdaMatrix lm = subcritical(3, 5);
  const auto small = sample_no_bankruptcy_shocks(lm, 10000, 2);
  const auto large = sample_no_bankruptcy_shocks(lm, 1000000, 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(small.min[i] >= large.min[i]);
    CHECK(small.max[i] <= large.max[i]);
    const double width = large.max[i] - large.min[i];
    CHECK(small.min[i] - large.min[i] < 0.05 * width);
    CHECK(large.max[i] - small.max[i] < 0.05 * width);
    CHECK(small.mean[i] == Approx(large.mean[i]).epsilon(0.02));
  }
  CHECK(small.feasible_fraction == Approx(large.feasible_fraction).epsilon(0.05));
}

}  // TEST_SUITE
