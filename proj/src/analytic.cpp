#include "sysrisk/analytic.hpp"

#include <cmath>
#include <numeric>
#include <vector>

#include "sysrisk/amplification.hpp"
#include "sysrisk/error.hpp"
#include "sysrisk/optimizer.hpp"

namespace sysrisk {

double TwoTypeModel::kappa_max() const noexcept {
  return std::min(c1 / static_cast<double>(n2), c2 / static_cast<double>(n1));
}

void TwoTypeModel::validate() const {
  if (n1 < 1 || n2 < 1) throw Error(ErrorCode::kInvalidSpec, "two-type model needs n1, n2 >= 1");
  if (!(c1 > 0.0) || !(c2 > 0.0)) throw Error(ErrorCode::kInvalidSpec, "leverages must be positive");
  if (c2 > c1) throw Error(ErrorCode::kInvalidSpec, "two-type model expects c2 <= c1");
  if (!(equity > 0.0)) throw Error(ErrorCode::kInvalidSpec, "equity must be positive");
  const double kmax = kappa_max();
  if (!(kappa >= 0.0) || kappa > kmax * (1.0 + 1e-12)) {
    throw Error(ErrorCode::kKappaOutOfRange,
                "kappa " + std::to_string(kappa) + " outside [0, " + std::to_string(kmax) + "]");
  }
}

DenseMatrix two_type_delta(std::size_t n1, std::size_t n2) {
  const std::size_t n = n1 + n2;
  DenseMatrix d(n);
  const double r21 = static_cast<double>(n2) / static_cast<double>(n1);
  const double r12 = static_cast<double>(n1) / static_cast<double>(n2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const bool ti = i < n1, tj = j < n1;
      if (ti && tj) d(i, j) = -r21;
      else if (!ti && !tj) d(i, j) = -r12;
      else d(i, j) = 1.0;
    }
  }
  return d;
}

LambdaMatrix two_type_lambda_matrix(const TwoTypeModel& model) {
  model.validate();
  const std::size_t n1 = model.n1, n = model.size();
  const double b1 = model.c1 / static_cast<double>(model.n1);
  const double b2 = model.c2 / static_cast<double>(model.n2);
  const DenseMatrix delta = two_type_delta(model.n1, model.n2);
  DenseMatrix lam(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const bool ti = i < n1, tj = j < n1;
      const double base = (ti && tj) ? b1 : (!ti && !tj) ? b2 : 0.0;
      double v = base + model.kappa * delta(i, j);
      // At κ_max one block cancels exactly up to rounding.
      if (v < 0.0 && v > -1e-12 * std::max(b1, b2)) v = 0.0;
      lam(i, j) = v;
    }
  }
  return LambdaMatrix(std::move(lam),
                      std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

double two_type_spectral_radius(const TwoTypeModel& model) {
  model.validate();
  const double k = model.kappa;
  const double n1 = static_cast<double>(model.n1), n2 = static_cast<double>(model.n2);
  const double p = model.c1 - k * n2;
  const double q = model.c2 - k * n1;
  return (p + q) / 2.0 + std::sqrt((p - q) * (p - q) / 4.0 + k * k * n1 * n2);
}

double two_type_psi(const TwoTypeModel& model, int t_terms) {
  model.validate();
  if (t_terms < 1) throw Error(ErrorCode::kInvalidArgument, "t_terms must be positive");
  if (model.kappa == 0.0) {
    const double n1 = static_cast<double>(model.n1), n2 = static_cast<double>(model.n2);
    double p1 = 1.0, p2 = 1.0, total = 0.0;
    for (int t = 0; t < t_terms; ++t) {
      total += (n1 * p1 + n2 * p2) / (n1 + n2);
      p1 *= model.c1;
      p2 *= model.c2;
    }
    return total;
  }
  return psi_series(two_type_lambda_matrix(model), t_terms);
}

double two_type_psi_assortative_limit(const TwoTypeModel& model) {
  model.validate();
  if (!(model.c1 < 1.0)) {
    throw Error(ErrorCode::kSupercriticalSystem, "assortative series diverges for c1 >= 1");
  }
  const double n1 = static_cast<double>(model.n1), n2 = static_cast<double>(model.n2);
  return (n1 / (1.0 - model.c1) + n2 / (1.0 - model.c2)) / (n1 + n2);
}

BankSet two_type_bank_set(const TwoTypeModel& model) {
  model.validate();
  const std::size_t n = model.size();
  std::vector<double> e(n, model.equity), a(n);
  for (std::size_t i = 0; i < n; ++i) a[i] = (i < model.n1 ? model.c1 : model.c2) * model.equity;
  return BankSet::build(e, a, a);
}

ExposureMatrix two_type_exposures(const TwoTypeModel& model, std::shared_ptr<const BankSet> banks) {
  if (!banks) banks = std::make_shared<const BankSet>(two_type_bank_set(model));
  if (banks->size() != model.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "bank set does not match the two-type model");
  }
  const LambdaMatrix lam = two_type_lambda_matrix(model);
  const std::size_t n = model.size();
  DenseMatrix alpha(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) alpha(i, j) = lam(i, j) / static_cast<double>(n);

  std::vector<std::size_t> first(model.n1), second(model.n2);
  std::iota(first.begin(), first.end(), std::size_t{0});
  std::iota(second.begin(), second.end(), model.n1);
  eliminate_diagonal(alpha, banks->zero_threshold(), first);
  eliminate_diagonal(alpha, banks->zero_threshold(), second);
  return ExposureMatrix::checked(std::move(banks), std::move(alpha));
}

GeometricPsi constant_leverage_psi(double leverage, int t_terms) {
  if (!(leverage >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "leverage must be >= 0");
  if (t_terms < 1) throw Error(ErrorCode::kInvalidArgument, "t_terms must be positive");
  GeometricPsi out;
  double p = 1.0;
  for (int t = 0; t < t_terms; ++t) {
    out.truncated += p;
    p *= leverage;
  }
  if (leverage < 1.0) out.closed_form = 1.0 / (1.0 - leverage);
  return out;
}

std::optional<double> mean_leverage_psi(const BankSet& bs) {
  double mean = 0.0;
  for (std::size_t i = 0; i < bs.size(); ++i) mean += bs.leverage(i);
  mean /= static_cast<double>(bs.size());
  if (mean >= 1.0) return std::nullopt;
  return 1.0 / (1.0 - mean);
}

}  // namespace sysrisk
