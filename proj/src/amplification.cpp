#include "sysrisk/amplification.hpp"

#include <cmath>
#include <limits>

#include "sysrisk/error.hpp"
#include "sysrisk/kernels.hpp"
#include "sysrisk/propagation.hpp"

namespace sysrisk {

LocalTerms psi_local_terms(const BankSet& bs) {
  LocalTerms out;
  const auto& a = bs.asset_share();
  const auto& l = bs.liability_share();
  const auto& e = bs.equity_share();
  for (std::size_t i = 0; i < bs.size(); ++i) {
    out.psi_1 += a[i];
    out.psi_2 += a[i] * l[i] / e[i];
  }
  return out;
}

DenseMatrix risk_matrix(const BankSet& bs) {
  const std::size_t n = bs.size();
  DenseMatrix r(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) r(i, j) = bs.liability_ratio(i) * bs.leverage(j);
  return r;
}

double psi_3_from_risk_matrix(const ExposureMatrix& m) {
  const DenseMatrix r = risk_matrix(m.banks());
  double s = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m.size(); ++j) s += m(i, j) * r(i, j);
  return s;
}

PsiReport psi_report(const LambdaMatrix& lm, int t_terms) {
  if (t_terms < 4) throw Error(ErrorCode::kInvalidArgument, "psi needs at least 4 terms");
  const auto t = kernels::series_terms(lm.values(), lm.equity_share(), t_terms);

  PsiReport r;
  r.terms_used = t_terms;
  for (double v : t) r.psi_total += v;
  r.psi_1 = t[1];
  r.psi_2 = t[2];
  r.psi_3 = t[3];
  for (std::size_t k = 4; k < t.size(); ++k) r.psi_res += t[k];

  r.lambda = spectral_radius(lm);
  r.supercritical = r.lambda >= 1.0;
  r.truncation_bound = r.supercritical ? std::numeric_limits<double>::infinity()
                                       : t.back() * r.lambda / (1.0 - r.lambda);
  return r;
}

PsiReport psi_full(const ExposureMatrix& m, int t_terms) {
  PsiReport r = psi_report(lambda_from_exposures(m), t_terms);
  // The first two terms are balance-sheet quantities; taking them from the
  // bank set keeps them independent of α down to the last bit. The residual
  // term absorbs the rounding so the decomposition still sums to psi_total.
  const LocalTerms local = psi_local_terms(m.banks());
  r.psi_1 = local.psi_1;
  r.psi_2 = local.psi_2;
  r.psi_res = r.psi_total - 1.0 - r.psi_1 - r.psi_2 - r.psi_3;
  return r;
}

double psi_series(const LambdaMatrix& lm, int t_terms) {
  return kernels::series_sum(lm.values(), lm.equity_share(), t_terms);
}

HInfinity h_infinity_general(const ExposureMatrix& m, std::span<const double> h1) {
  const LambdaMatrix lm = lambda_from_exposures(m);
  const auto h_inf = h_infinity_exact(lm, h1);
  const auto& e = m.banks().equity_share();
  const auto& l = m.banks().liability_share();
  const std::size_t n = m.size();

  HInfinity out;
  for (std::size_t i = 0; i < n; ++i) out.exact += h_inf[i] * e[i];
  for (std::size_t i = 0; i < n; ++i) out.three_term += (e[i] + l[i]) * h1[i];
  for (std::size_t j = 0; j < n; ++j) {
    double inner = 0.0;
    for (std::size_t k = 0; k < n; ++k) inner += m(j, k) * h1[k];
    out.three_term += l[j] / e[j] * inner;
  }
  out.gap = out.exact - out.three_term;
  return out;
}

}  // namespace sysrisk
