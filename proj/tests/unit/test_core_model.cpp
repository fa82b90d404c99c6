#include <Eigen/Dense>

#include "doctest.h"
#include "support.hpp"

#include "sysrisk/analytic.hpp"
#include "sysrisk/error.hpp"

using namespace sysrisk;
using doctest::Approx;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::kInvalidArgument;
}

double eigen_radius(const DenseMatrix& m) {
  const auto n = static_cast<Eigen::Index>(m.size());
  Eigen::MatrixXd x(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      x(i, j) = m(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  return Eigen::EigenSolver<Eigen::MatrixXd>(x, false).eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

TEST_SUITE("core-model") {

TEST_CASE("symmetric two-bank set has the expected shares") {
  const BankSet bs = build_bank_set({1, 1}, {0.5, 0.5}, {0.5, 0.5});
  CHECK(bs.equity_share()[0] == 0.5);
  CHECK(bs.equity_share()[1] == 0.5);
  CHECK(bs.asset_share()[0] == 0.25);
  CHECK(bs.liability_share()[1] == 0.25);
  CHECK(bs.leverage(0) == 0.5);
}

TEST_CASE("grid population of 30 banks is valid") {
  std::vector<double> e(30, 1.0), a(30);
  for (std::size_t i = 0; i < 30; ++i) a[i] = 0.2 + 0.6 * static_cast<double>(i) / 29.0;
  const BankSet bs = build_bank_set(e, a, a);
  CHECK(bs.size() == 30);
  CHECK(bs.leverage(29) == Approx(0.8));
}

TEST_CASE("bank set rejects bad input") {
  CHECK(code_of([] { build_bank_set({1, 1}, {1, 0}, {0, 0.5}); }) == ErrorCode::kMarketImbalance);
  CHECK(code_of([] { build_bank_set({1, 0}, {0.5, 0.5}, {0.5, 0.5}); }) ==
        ErrorCode::kNonPositiveEquity);
  CHECK(code_of([] { build_bank_set({1, -1}, {0.5, 0.5}, {0.5, 0.5}); }) ==
        ErrorCode::kNonPositiveEquity);
  CHECK(code_of([] { build_bank_set({1, 1, 1}, {0.5, 0.5}, {0.5, 0.5}); }) ==
        ErrorCode::kDimensionMismatch);
  CHECK(code_of([] { build_bank_set({1}, {0}, {0}); }) == ErrorCode::kDimensionMismatch);
  CHECK(code_of([] { build_bank_set({1, 1}, {-0.5, 0.5}, {0, 0}); }) != ErrorCode::kParseError);
}

TEST_CASE("market closure uses a relative tolerance") {
  CHECK_NOTHROW(build_bank_set({1, 1}, {1e6, 1e6}, {1e6, 1e6 * (1 + 1e-12)}));
  CHECK_THROWS_AS(build_bank_set({1, 1}, {1e6, 1e6}, {1e6, 1e6 * (1 + 1e-6)}), Error);
}

TEST_CASE("validator accepts the feasible start and flags each violation") {
  auto bs = testing::pareto_banks(8, 3);
  const ExposureMatrix ok = initial_feasible_matrix(bs);
  CHECK(validate_exposures(ok).ok());

  DenseMatrix diag = ok.alpha();
  diag(0, 0) = 0.01;
  const auto r1 = validate_exposures(ExposureMatrix(bs, diag));
  REQUIRE(r1.find(ConstraintKind::kDiagonal) != nullptr);
  CHECK(r1.find(ConstraintKind::kDiagonal)->worst_residual == Approx(0.01));
  CHECK(r1.find(ConstraintKind::kDiagonal)->row == 0);

  DenseMatrix row = ok.alpha();
  std::size_t j = 1;
  while (row(2, j) < 2e-3) ++j;
  row(2, j) -= 1e-3;
  const auto r2 = validate_exposures(ExposureMatrix(bs, row));
  REQUIRE(r2.find(ConstraintKind::kRowMargin) != nullptr);
  CHECK(r2.find(ConstraintKind::kRowMargin)->worst_residual == Approx(1e-3).epsilon(1e-6));
  CHECK(r2.find(ConstraintKind::kRowMargin)->row == 2);
  CHECK(r2.find(ConstraintKind::kColumnMargin) != nullptr);
  CHECK(r2.find(ConstraintKind::kNegative) == nullptr);

  DenseMatrix neg = ok.alpha();
  neg(1, 3) = -neg(1, 3);
  CHECK(validate_exposures(ExposureMatrix(bs, neg)).find(ConstraintKind::kNegative) != nullptr);
  CHECK_FALSE(validate_exposures(ExposureMatrix(bs, neg)).describe().empty());
}

TEST_CASE("empty report is the conjunction of the four constraint families") {
  auto bs = testing::pareto_banks(6, 11);
  const DenseMatrix base = testing::random_feasible(bs, 200, 1).alpha();
  Rng rng = make_rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    DenseMatrix m = base;
    const auto i = uniform_index(rng, 6), j = uniform_index(rng, 6);
    const int kind = static_cast<int>(uniform_index(rng, 3));
    if (kind == 0) m(i, j) += 1e-3 * uniform01(rng);
    if (kind == 1) m(i, j) = -m(i, j);
    const ExposureMatrix em(bs, m);

    bool diag_ok = true, nonneg = true, rows_ok = true, cols_ok = true;
    const auto rs = m.row_sums(), cs = m.column_sums();
    for (std::size_t k = 0; k < 6; ++k) {
      diag_ok &= m(k, k) == 0.0;
      const double scale = std::max(bs->asset_share()[k], bs->liability_share()[k]);
      rows_ok &= std::abs(rs[k] - bs->asset_share()[k]) <= kMarginTolerance * scale;
      cols_ok &= std::abs(cs[k] - bs->liability_share()[k]) <= kMarginTolerance * scale;
      for (std::size_t l = 0; l < 6; ++l) nonneg &= m(k, l) >= 0.0;
    }
    CHECK(validate_exposures(em).ok() == (diag_ok && nonneg && rows_ok && cols_ok));
  }
}

TEST_CASE("lambda matrix rows sum to leverage and round-trip to alpha") {
  auto bs = testing::pareto_banks(5, 21);
  const ExposureMatrix m = testing::random_feasible(bs, 100, 2);
  const LambdaMatrix lm = lambda_from_exposures(m);
  for (std::size_t i = 0; i < 5; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < 5; ++j) {
      s += lm(i, j);
      const double back = lm(i, j) * bs->equity_share()[i];
      CHECK(std::abs(back - m(i, j)) <= 1e-14 * std::max(m(i, j), 1e-300));
    }
    CHECK(s == Approx(bs->leverage(i)).epsilon(1e-12));
  }
}

TEST_CASE("zero exposures give a zero lambda matrix with zero radius") {
  const auto bs = std::make_shared<const BankSet>(build_bank_set({1, 2, 3}, {0, 0, 0}, {0, 0, 0}));
  const ExposureMatrix m(bs, DenseMatrix(3));
  const LambdaMatrix lm = lambda_from_exposures(m);
  for (double v : lm.values().data()) CHECK(v == 0.0);
  CHECK(spectral_radius(lm) == 0.0);
}

TEST_CASE("spectral radius of the two-type examples") {
  TwoTypeModel m{5, 50, 2.0, 0.5, 0.0, 1.0};
  CHECK(spectral_radius(two_type_lambda_matrix(m)) == Approx(2.0).epsilon(1e-10));
  m.kappa = 0.04;
  CHECK(spectral_radius(two_type_lambda_matrix(m)) == Approx(0.8).epsilon(1e-10));
}

TEST_CASE("power iteration agrees with a dense eigen solver") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto bs = testing::pareto_banks(12, seed);
    const LambdaMatrix lm = lambda_from_exposures(testing::random_feasible(bs, 300, seed));
    const auto r = power_iteration(lm.values());
    CHECK(r.converged);
    CHECK(r.value == Approx(eigen_radius(lm.values())).epsilon(1e-10));
  }
}

TEST_CASE("imprimitive matrices converge through the shifted iteration") {
  // Bipartite 2-cycle: eigenvalues ±0.5, plain iteration oscillates.
  DenseMatrix m(2);
  m(0, 1) = 0.25;
  m(1, 0) = 1.0;
  const auto r = power_iteration(m);
  CHECK(r.converged);
  CHECK(r.value == Approx(0.5).epsilon(1e-12));

  // Directed 3-cycle with unequal weights: λ = (0.5·2·0.8)^{1/3}.
  DenseMatrix c(3);
  c(0, 1) = 0.5;
  c(1, 2) = 2.0;
  c(2, 0) = 0.8;
  CHECK(power_iteration(c).value == Approx(std::cbrt(0.8)).epsilon(1e-10));
}

TEST_CASE("spectral radius is cached on request") {
  TwoTypeModel m{3, 4, 0.9, 0.5, 0.05, 1.0};
  LambdaMatrix lm = two_type_lambda_matrix(m);
  CHECK_FALSE(lm.cached_spectral_radius().has_value());
  const double v = lm.cache_spectral_radius();
  REQUIRE(lm.cached_spectral_radius().has_value());
  CHECK(*lm.cached_spectral_radius() == v);
  CHECK(spectral_radius(lm) == v);
}

TEST_CASE("linear solve with pivoting") {
  DenseMatrix a(3);
  a(0, 1) = 1;
  a(1, 0) = 2;
  a(1, 2) = 1;
  a(2, 2) = 3;
  const auto x = solve_linear(a, {2, 5, 6});  // x = (1.5, 2, 2)
  CHECK(x[0] == Approx(1.5));
  CHECK(x[1] == Approx(2.0));
  CHECK(x[2] == Approx(2.0));
  CHECK_THROWS_AS(solve_linear(DenseMatrix(2), {1, 1}), Error);
}

}  // TEST_SUITE
