#pragma once

// Shared fixtures and brute-force oracles for the test binaries.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <memory>
#include <vector>

#include "sysrisk/amplification.hpp"
#include "sysrisk/core_model.hpp"
#include "sysrisk/generators.hpp"
#include "sysrisk/optimizer.hpp"
#include "sysrisk/random.hpp"

namespace testing {

using namespace sysrisk;

// Small Pareto populations sometimes contain a bank holding more than half of
// all interbank assets, which no zero-diagonal matrix can accommodate. Such
// draws are skipped by moving to the next derived seed.
inline std::shared_ptr<const BankSet> pareto_banks(std::size_t n, std::uint64_t seed,
                                                   double lo = 0.32, double hi = 0.96) {
  PopulationSpec spec;
  spec.n_banks = n;
  spec.leverage_low = lo;
  spec.leverage_high = hi;
  for (std::uint64_t attempt = 0;; ++attempt) {
    spec.rng_seed = attempt == 0 ? seed : mix_seed(seed, attempt);
    auto bs = std::make_shared<const BankSet>(generate_population(spec));
    const auto& a = bs->asset_share();
    const double total = std::accumulate(a.begin(), a.end(), 0.0);
    if (*std::max_element(a.begin(), a.end()) < 0.45 * total) return bs;
  }
}

inline std::shared_ptr<const BankSet> grid_banks(std::size_t n, double c = 1.0) {
  PopulationSpec spec;
  spec.kind = PopulationKind::kGrid;
  spec.n_banks = n;
  spec.rescale = c;
  return std::make_shared<const BankSet>(generate_population(spec));
}

// Equity drawn freely, A_i = L_i = C·E_i.
inline std::shared_ptr<const BankSet> constant_leverage_banks(std::size_t n, double c,
                                                              std::uint64_t seed) {
  Rng rng = make_rng(seed, 99);
  std::vector<double> e(n), a(n);
  for (std::size_t i = 0; i < n; ++i) {
    e[i] = 0.5 + 2.0 * uniform01(rng);
    a[i] = c * e[i];
  }
  return std::make_shared<const BankSet>(build_bank_set(e, a, a));
}

// Feasible start followed by `moves` random non-null D-moves.
inline ExposureMatrix random_feasible(std::shared_ptr<const BankSet> bs, int moves,
                                      std::uint64_t seed) {
  ExposureMatrix start = initial_feasible_matrix(bs);
  if (bs->size() < 4) return start;  // no D-moves exist below four banks
  DenseMatrix alpha = start.alpha();
  Rng rng = make_rng(seed, 7);
  for (int k = 0; k < moves; ++k) {
    const DMove mv = propose_d_move(alpha, bs->zero_threshold(), 0.5, rng);
    if (!mv.null) apply_d_move(alpha, mv, bs->zero_threshold());
  }
  return ExposureMatrix(bs, std::move(alpha));
}

// Dense product by the textbook triple loop.
inline DenseMatrix naive_product(const DenseMatrix& x, const DenseMatrix& y) {
  const std::size_t n = x.size();
  DenseMatrix z(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += x(i, k) * y(k, j);
      z(i, j) = s;
    }
  return z;
}

// Σ_t Σ_ij e_i (Λᵗ)_ij with explicit matrix powers.
inline std::vector<double> naive_series_terms(const LambdaMatrix& lm, int n_terms) {
  const std::size_t n = lm.size();
  DenseMatrix p(n);
  for (std::size_t i = 0; i < n; ++i) p(i, i) = 1.0;
  std::vector<double> out;
  for (int t = 0; t < n_terms; ++t) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) s += lm.equity_share()[i] * p(i, j);
    out.push_back(s);
    p = naive_product(p, lm.values());
  }
  return out;
}

inline double max_abs_diff(std::span<const double> x, std::span<const double> y) {
  double m = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
  return m;
}

}  // namespace testing
