#include "sysrisk/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "sysrisk/error.hpp"
#include "sysrisk/kernels.hpp"

namespace sysrisk {

BankSet BankSet::build(std::vector<double> equity, std::vector<double> assets,
                       std::vector<double> liabilities) {
  const std::size_t n = equity.size();
  if (assets.size() != n || liabilities.size() != n) {
    throw Error(ErrorCode::kDimensionMismatch,
                "equity, assets and liabilities must have equal length");
  }
  if (n < 2) throw Error(ErrorCode::kDimensionMismatch, "need at least two banks");

  for (std::size_t i = 0; i < n; ++i) {
    if (!(equity[i] > 0.0) || !std::isfinite(equity[i])) {
      throw Error(ErrorCode::kNonPositiveEquity,
                  "equity of bank " + std::to_string(i) + " is not positive");
    }
    if (!(assets[i] >= 0.0) || !(liabilities[i] >= 0.0) || !std::isfinite(assets[i]) ||
        !std::isfinite(liabilities[i])) {
      throw Error(ErrorCode::kInvalidArgument,
                  "interbank assets/liabilities of bank " + std::to_string(i) +
                      " must be finite and non-negative");
    }
  }

  const double sum_a = std::accumulate(assets.begin(), assets.end(), 0.0);
  const double sum_l = std::accumulate(liabilities.begin(), liabilities.end(), 0.0);
  if (std::abs(sum_a - sum_l) > kMarginTolerance * std::max({sum_a, sum_l, 1e-300})) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "market imbalance: sum of assets " << sum_a << " != sum of liabilities " << sum_l;
    throw Error(ErrorCode::kMarketImbalance, msg.str());
  }

  BankSet bs;
  bs.total_equity_ = std::accumulate(equity.begin(), equity.end(), 0.0);
  bs.e_.resize(n);
  bs.a_.resize(n);
  bs.l_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    bs.e_[i] = equity[i] / bs.total_equity_;
    bs.a_[i] = assets[i] / bs.total_equity_;
    bs.l_[i] = liabilities[i] / bs.total_equity_;
  }
  bs.zero_threshold_ = kZeroSnapFactor * *std::max_element(bs.a_.begin(), bs.a_.end());
  bs.equity_ = std::move(equity);
  bs.assets_ = std::move(assets);
  bs.liabilities_ = std::move(liabilities);
  return bs;
}

ExposureMatrix::ExposureMatrix(std::shared_ptr<const BankSet> banks, DenseMatrix alpha)
    : banks_(std::move(banks)), alpha_(std::move(alpha)) {
  if (!banks_) throw Error(ErrorCode::kInvalidArgument, "exposure matrix needs a bank set");
  if (alpha_.size() != banks_->size()) {
    throw Error(ErrorCode::kDimensionMismatch, "exposure matrix size does not match bank set");
  }
}

ExposureMatrix ExposureMatrix::checked(std::shared_ptr<const BankSet> banks, DenseMatrix alpha) {
  ExposureMatrix m(std::move(banks), std::move(alpha));
  const auto report = validate_exposures(m);
  if (!report.ok()) throw Error(ErrorCode::kInfeasibleMargins, report.describe());
  return m;
}

std::string to_string(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::kDiagonal: return "diagonal";
    case ConstraintKind::kNegative: return "negative";
    case ConstraintKind::kRowMargin: return "row_margin";
    case ConstraintKind::kColumnMargin: return "column_margin";
  }
  return "unknown";
}

const ConstraintViolation* ValidationReport::find(ConstraintKind kind) const noexcept {
  for (const auto& v : violations)
    if (v.kind == kind) return &v;
  return nullptr;
}

std::string ValidationReport::describe() const {
  if (ok()) return "feasible";
  std::ostringstream out;
  out.precision(6);
  for (std::size_t k = 0; k < violations.size(); ++k) {
    const auto& v = violations[k];
    if (k) out << "; ";
    out << to_string(v.kind) << " x" << v.count << " (worst " << v.worst_residual << " at "
        << v.row << "," << v.col << ")";
  }
  return out.str();
}

namespace {

void note(ConstraintViolation& v, double residual, std::size_t i, std::size_t j) {
  ++v.count;
  if (residual > v.worst_residual) {
    v.worst_residual = residual;
    v.row = i;
    v.col = j;
  }
}

}  // namespace

ValidationReport validate_exposures(const ExposureMatrix& m) {
  const BankSet& bs = m.banks();
  const std::size_t n = m.size();
  const auto& a = bs.asset_share();
  const auto& l = bs.liability_share();

  ConstraintViolation diag{ConstraintKind::kDiagonal};
  ConstraintViolation neg{ConstraintKind::kNegative};
  ConstraintViolation rows{ConstraintKind::kRowMargin};
  ConstraintViolation cols{ConstraintKind::kColumnMargin};

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double v = m(i, j);
      if (i == j && v != 0.0) note(diag, std::abs(v), i, j);
      if (v < 0.0 || std::isnan(v)) note(neg, std::isnan(v) ? INFINITY : -v, i, j);
    }
  }

  const auto row_sums = m.alpha().row_sums();
  const auto col_sums = m.alpha().column_sums();
  const double scale = std::max(
      {*std::max_element(a.begin(), a.end()), *std::max_element(l.begin(), l.end()), 1e-300});
  for (std::size_t i = 0; i < n; ++i) {
    const double rr = std::abs(row_sums[i] - a[i]);
    if (!(rr <= kMarginTolerance * scale)) note(rows, rr, i, i);
    const double cr = std::abs(col_sums[i] - l[i]);
    if (!(cr <= kMarginTolerance * scale)) note(cols, cr, i, i);
  }

  ValidationReport report;
  for (auto* v : {&diag, &neg, &rows, &cols})
    if (v->count) report.violations.push_back(*v);
  return report;
}

LambdaMatrix::LambdaMatrix(DenseMatrix values, std::vector<double> equity_share)
    : values_(std::move(values)), e_(std::move(equity_share)) {
  if (e_.size() != values_.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "equity shares do not match matrix size");
  }
}

double LambdaMatrix::cache_spectral_radius() {
  if (!radius_) radius_ = power_iteration(values_).value;
  return *radius_;
}

LambdaMatrix lambda_from_exposures(const ExposureMatrix& m) {
  const std::size_t n = m.size();
  const auto& e = m.banks().equity_share();
  DenseMatrix lam(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) lam(i, j) = m(i, j) / e[i];
  return LambdaMatrix(std::move(lam), e);
}

SpectralResult power_iteration(const DenseMatrix& m, const SpectralOptions& opts) {
  const std::size_t n = m.size();
  SpectralResult result;
  if (n == 0) {
    result.converged = true;
    return result;
  }

  double max_row_sum = 0.0;
  for (double s : m.row_sums()) max_row_sum = std::max(max_row_sum, s);
  if (max_row_sum == 0.0) {
    result.converged = true;
    return result;
  }

  std::vector<double> v(n), w(n);
  double shift = 0.0;
  double previous = -1.0;
  int stable = 0;
  int since_restart = 0;
  std::fill(v.begin(), v.end(), 1.0 / static_cast<double>(n));

  for (int it = 1; it <= opts.max_iterations; ++it, ++since_restart) {
    kernels::matvec(m, v, w);
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      w[i] += shift * v[i];
      norm += w[i];
    }
    // v has unit 1-norm, so ‖(M+sI)v‖₁ estimates ρ(M)+s once v aligns.
    const double estimate = norm - shift;
    result.iterations = it;
    result.value = std::max(estimate, 0.0);
    if (norm <= 0.0) {
      // Nilpotent action on the iterate: all mass vanished.
      result.value = 0.0;
      result.converged = true;
      return result;
    }
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / norm;

    if (std::abs(estimate - previous) <= opts.relative_tolerance * std::max(estimate, 1e-300)) {
      if (++stable >= 3) {
        result.converged = true;
        return result;
      }
    } else {
      stable = 0;
    }
    previous = estimate;

    if (shift == 0.0 && since_restart >= opts.stagnation_window) {
      shift = max_row_sum;
      result.shifted = true;
      since_restart = 0;
      stable = 0;
      previous = -1.0;
      std::fill(v.begin(), v.end(), 1.0 / static_cast<double>(n));
    }
  }
  return result;
}

double spectral_radius(const LambdaMatrix& lm) {
  if (lm.cached_spectral_radius()) return *lm.cached_spectral_radius();
  return power_iteration(lm.values()).value;
}

std::vector<double> solve_linear(DenseMatrix a, std::vector<double> b) {
  const std::size_t n = a.size();
  if (b.size() != n) throw Error(ErrorCode::kDimensionMismatch, "rhs length mismatch");
  double scale = 0.0;
  for (double v : a.data()) scale = std::max(scale, std::abs(v));
  const double tiny = 1e-14 * std::max(scale, 1e-300);

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pivot = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(pivot, k))) pivot = i;
    if (std::abs(a(pivot, k)) <= tiny) {
      throw Error(ErrorCode::kInvalidArgument, "matrix is numerically singular");
    }
    if (pivot != k) {
      std::swap_ranges(a.row(k).begin(), a.row(k).end(), a.row(pivot).begin());
      std::swap(b[k], b[pivot]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a(i, k) / a(k, k);
      if (f == 0.0) continue;
      a(i, k) = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
      b[i] -= f * b[k];
    }
  }
  std::vector<double> x(n);
  for (std::size_t k = n; k-- > 0;) {
    double s = b[k];
    for (std::size_t j = k + 1; j < n; ++j) s -= a(k, j) * x[j];
    x[k] = s / a(k, k);
  }
  return x;
}

}  // namespace sysrisk
