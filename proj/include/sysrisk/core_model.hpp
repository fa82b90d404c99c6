#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sysrisk/dense_matrix.hpp"

namespace sysrisk {

// Relative tolerance for market closure and for row/column margins.
inline constexpr double kMarginTolerance = 1e-9;
// Entries below kZeroSnapFactor * max(a_i) count as exactly zero.
inline constexpr double kZeroSnapFactor = 1e-12;

// Balance sheets of N banks in currency units. Immutable once built; the
// dimensionless shares used by every computation are derived on construction.
class BankSet {
 public:
  // Validates and builds. Throws Error with kDimensionMismatch,
  // kNonPositiveEquity or kMarketImbalance.
  static BankSet build(std::vector<double> equity, std::vector<double> assets,
                       std::vector<double> liabilities);

  std::size_t size() const noexcept { return equity_.size(); }

  const std::vector<double>& equity() const noexcept { return equity_; }
  const std::vector<double>& assets() const noexcept { return assets_; }
  const std::vector<double>& liabilities() const noexcept { return liabilities_; }
  double total_equity() const noexcept { return total_equity_; }

  // e_i, a_i, l_i: each balance-sheet item divided by Σ_k E_k.
  const std::vector<double>& equity_share() const noexcept { return e_; }
  const std::vector<double>& asset_share() const noexcept { return a_; }
  const std::vector<double>& liability_share() const noexcept { return l_; }

  // A_i/E_i and L_i/E_i.
  double leverage(std::size_t i) const noexcept { return assets_[i] / equity_[i]; }
  double liability_ratio(std::size_t i) const noexcept { return liabilities_[i] / equity_[i]; }

  // ε_zero = 1e-12 · max_i a_i.
  double zero_threshold() const noexcept { return zero_threshold_; }

 private:
  BankSet() = default;

  std::vector<double> equity_, assets_, liabilities_;
  std::vector<double> e_, a_, l_;
  double total_equity_ = 0.0;
  double zero_threshold_ = 0.0;
};

inline BankSet build_bank_set(std::vector<double> equity, std::vector<double> assets,
                              std::vector<double> liabilities) {
  return BankSet::build(std::move(equity), std::move(assets), std::move(liabilities));
}

// Dimensionless exposures α_ij = A_ij/Σ_k E_k bound to the bank set whose
// margins they are meant to satisfy. Construction does not validate; use
// validate_exposures or ExposureMatrix::checked.
class ExposureMatrix {
 public:
  ExposureMatrix(std::shared_ptr<const BankSet> banks, DenseMatrix alpha);

  // Builds and throws kInfeasibleMargins if validate_exposures reports anything.
  static ExposureMatrix checked(std::shared_ptr<const BankSet> banks, DenseMatrix alpha);

  std::size_t size() const noexcept { return alpha_.size(); }
  const BankSet& banks() const noexcept { return *banks_; }
  const std::shared_ptr<const BankSet>& bank_ptr() const noexcept { return banks_; }
  const DenseMatrix& alpha() const noexcept { return alpha_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return alpha_(i, j); }

 private:
  std::shared_ptr<const BankSet> banks_;
  DenseMatrix alpha_;
};

enum class ConstraintKind { kDiagonal, kNegative, kRowMargin, kColumnMargin };

std::string to_string(ConstraintKind kind);

struct ConstraintViolation {
  ConstraintKind kind;
  // Number of offending entries (or rows/columns for margins).
  std::size_t count = 0;
  // Largest absolute residual within this family.
  double worst_residual = 0.0;
  // Index of the worst offender: (row, col) for entries, (index, index) for margins.
  std::size_t row = 0;
  std::size_t col = 0;
};

struct ValidationReport {
  std::vector<ConstraintViolation> violations;

  bool ok() const noexcept { return violations.empty(); }
  const ConstraintViolation* find(ConstraintKind kind) const noexcept;
  std::string describe() const;
};

// Checks α_ii = 0, α_ij ≥ 0, Σ_j α_ij = a_i and Σ_i α_ij = l_j (relative
// tolerance kMarginTolerance against max(a_i, l_i, ε_zero)). Never throws except
// on a shape mismatch (kDimensionMismatch).
ValidationReport validate_exposures(const ExposureMatrix& m);

// Λ together with the equity shares e_i that weight the aggregate loss.
// Either derived from exposures (Λ_ij = α_ij/e_i) or given directly, as in the
// closed-form models which allow self-links.
class LambdaMatrix {
 public:
  LambdaMatrix(DenseMatrix values, std::vector<double> equity_share);

  std::size_t size() const noexcept { return values_.size(); }
  const DenseMatrix& values() const noexcept { return values_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return values_(i, j); }
  const std::vector<double>& equity_share() const noexcept { return e_; }

  const std::optional<double>& cached_spectral_radius() const noexcept { return radius_; }
  // Computes and stores λ; later calls to spectral_radius reuse it.
  double cache_spectral_radius();

 private:
  DenseMatrix values_;
  std::vector<double> e_;
  std::optional<double> radius_;
};

LambdaMatrix lambda_from_exposures(const ExposureMatrix& m);

struct SpectralOptions {
  double relative_tolerance = 1e-12;
  int max_iterations = 100000;
  // Iterations without convergence before switching to the shifted iteration.
  int stagnation_window = 2000;
};

struct SpectralResult {
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
  bool shifted = false;
};

// Perron root of a non-negative matrix by power iteration with 1-norm
// estimates. Imprimitive matrices (e.g. bipartite) do not settle under plain
// iteration; after `stagnation_window` steps the iteration restarts on
// M + sI with s = max row sum, whose dominant eigenvalue is unique.
SpectralResult power_iteration(const DenseMatrix& m, const SpectralOptions& opts = {});

// λ of Λ, using the cached value when present. Non-convergence is not an
// error here: the best estimate is returned.
double spectral_radius(const LambdaMatrix& lm);

// Solves A x = b by LU with partial pivoting. Throws kInvalidArgument when A
// is numerically singular.
std::vector<double> solve_linear(DenseMatrix a, std::vector<double> b);

}  // namespace sysrisk
