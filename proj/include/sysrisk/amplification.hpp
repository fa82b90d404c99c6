#pragma once

#include <span>
#include <vector>

#include "sysrisk/core_model.hpp"

namespace sysrisk {

// Term-count presets for the truncated Ψ series.
namespace terms {
inline constexpr int kIllustrativeTrial = 50;
inline constexpr int kIllustrativeFinal = 200;
inline constexpr int kGridTrial = 13;
inline constexpr int kGridFinal = 103;
inline constexpr int kSupercriticalTrial = 6;
}  // namespace terms

// Ψ = 1 + Ψ⁽¹⁾ + Ψ⁽²⁾ + Ψ⁽³⁾ + Ψ⁽ʳᵉˢ⁾ from a truncated series.
struct PsiReport {
  double psi_total = 0.0;
  double psi_1 = 0.0;
  double psi_2 = 0.0;
  double psi_3 = 0.0;
  double psi_res = 0.0;
  int terms_used = 0;
  double lambda = 0.0;
  // Geometric bound on the neglected tail; +inf when λ ≥ 1.
  double truncation_bound = 0.0;
  // λ ≥ 1: the series diverges and psi_total is only the partial sum.
  bool supercritical = false;
};

struct LocalTerms {
  double psi_1 = 0.0;
  double psi_2 = 0.0;
};

// Ψ⁽¹⁾ = Σ A_i / Σ E_k and Ψ⁽²⁾ = Σ A_i L_i / E_i / Σ E_k. These need only the
// balance sheets.
LocalTerms psi_local_terms(const BankSet& bs);

// R⁽³⁾_ij = L_i A_j / (E_i E_j) for i ≠ j, zero on the diagonal.
DenseMatrix risk_matrix(const BankSet& bs);

// Ψ⁽³⁾ = Σ_ij α_ij R⁽³⁾_ij.
double psi_3_from_risk_matrix(const ExposureMatrix& m);

// Series Σ_{t<t_terms} eᵀ Λᵗ 1 evaluated by repeated left-multiplication of eᵀ.
// Requires t_terms ≥ 4. In the supercritical case the report is still
// returned, flagged, with an infinite truncation bound.
PsiReport psi_report(const LambdaMatrix& lm, int t_terms);
// As psi_report, but Ψ⁽¹⁾ and Ψ⁽²⁾ come from the balance sheets and Ψ⁽ʳᵉˢ⁾ is
// what remains of the series after the first four terms.
PsiReport psi_full(const ExposureMatrix& m, int t_terms);

// Plain truncated series value without decomposition or λ.
double psi_series(const LambdaMatrix& lm, int t_terms);

struct HInfinity {
  // Σ_i h∞_i e_i from the exact linear solve.
  double exact = 0.0;
  // Σ e_i h_i + Σ l_i h_i + Σ_jl (l_j/e_j) α_jl h_l: terms through second order.
  double three_term = 0.0;
  // exact − three_term: the neglected higher-order contribution.
  double gap = 0.0;
};

// Throws kSupercriticalSystem when λ ≥ 1.
HInfinity h_infinity_general(const ExposureMatrix& m, std::span<const double> h1);

}  // namespace sysrisk
