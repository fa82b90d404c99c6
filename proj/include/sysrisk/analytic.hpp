#pragma once

#include <cstddef>
#include <memory>
#include <optional>

#include "sysrisk/core_model.hpp"

namespace sysrisk {

// n1 banks with leverage c1 and n2 banks with leverage c2 ≤ c1, all with the
// same equity, linked by Λ = Λ_a + κΔ. κ = 0 is the block-diagonal
// (maximally assortative) network, κ = κ_max the maximally disassortative one.
struct TwoTypeModel {
  std::size_t n1 = 1;
  std::size_t n2 = 1;
  double c1 = 1.0;
  double c2 = 0.5;
  double kappa = 0.0;
  double equity = 1.0;

  std::size_t size() const noexcept { return n1 + n2; }
  // min(c1/n2, c2/n1)
  double kappa_max() const noexcept;
  // Throws kInvalidSpec for bad sizes/leverages and kKappaOutOfRange for κ.
  void validate() const;
};

// Δ with blocks −n2/n1, 1, 1, −n1/n2. Every column sums to 0.
DenseMatrix two_type_delta(std::size_t n1, std::size_t n2);

// Λ_a + κΔ with equity shares 1/N. Self-links are part of the model.
LambdaMatrix two_type_lambda_matrix(const TwoTypeModel& model);

// Closed-form dominant eigenvalue from the two-level eigenvector ansatz.
double two_type_spectral_radius(const TwoTypeModel& model);

// Truncated Ψ. At κ = 0 this is Σ_{t<t_terms} (n1 c1ᵗ + n2 c2ᵗ)/N; otherwise
// the series of the explicit matrix.
double two_type_psi(const TwoTypeModel& model, int t_terms);

// Infinite-series Ψ at κ = 0: [n1/(1−c1) + n2/(1−c2)]/N. Requires c1 < 1.
double two_type_psi_assortative_limit(const TwoTypeModel& model);

// Balance sheets of the model: E_i = equity, A_i = L_i = c_i · equity.
BankSet two_type_bank_set(const TwoTypeModel& model);

// The model as an exposure matrix without self-links: each diagonal block's
// self-exposure is redistributed inside its own block, which keeps Ψ. Needs
// n1, n2 ≥ 2 whenever the corresponding diagonal is non-zero.
ExposureMatrix two_type_exposures(const TwoTypeModel& model,
                                  std::shared_ptr<const BankSet> banks = nullptr);

struct GeometricPsi {
  double truncated = 0.0;
  // 1/(1−C) when C < 1.
  std::optional<double> closed_form;
};

// Ψ for uniform leverage C: Σ_{t<t_terms} Cᵗ. Throws kInvalidArgument for C < 0.
GeometricPsi constant_leverage_psi(double leverage, int t_terms);

// Sharply-peaked leverage approximation 1/(1 − ⟨A_i/E_i⟩); nullopt when the
// mean leverage is ≥ 1.
std::optional<double> mean_leverage_psi(const BankSet& bs);

}  // namespace sysrisk
