#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sysrisk/analytic.hpp"
#include "sysrisk/core_model.hpp"
#include "sysrisk/random.hpp"

namespace sysrisk {

enum class PopulationKind { kParetoUniform, kGrid, kTwoType, kCustom };

std::string to_string(PopulationKind k);
PopulationKind parse_population_kind(const std::string& name);

struct PopulationSpec {
  PopulationKind kind = PopulationKind::kParetoUniform;
  std::size_t n_banks = 30;
  std::uint64_t rng_seed = 1;

  // pareto_uniform: E ~ Pareto(exponent, scale), A/E = L/E ~ U(low, high).
  double pareto_exponent = 3.0;
  double pareto_scale = 1.0;
  double leverage_low = 0.32;
  double leverage_high = 0.96;

  // grid: E = 1, A/E = L/E = rescale · (grid_low + grid_span · i/(N−1)).
  double grid_low = 0.2;
  double grid_span = 0.6;
  double rescale = 1.0;

  TwoTypeModel two_type;

  // custom: balance sheets given verbatim.
  std::vector<double> equity, assets, liabilities;

  // Throws kInvalidSpec.
  void validate() const;
};

BankSet generate_population(const PopulationSpec& spec);

// Pareto variate with P(X > x) = (x/scale)^(−exponent), x ≥ scale.
double sample_pareto(Rng& rng, double exponent, double scale);

inline constexpr double kEquityMarkup = 1.25;
inline constexpr double kEquityNoiseSd = 0.2;
// ξ at or below this is redrawn, which keeps E_i ≥ 0.25 · max(A_i, L_i).
inline constexpr double kEquityNoiseFloor = 0.2;

// E_i = max(A_i, L_i) · 1.25 · ξ_i with ξ_i ~ N(1, noise_sd) redrawn while
// ξ_i ≤ 0.2. Throws kDegenerateBank if A_i = L_i = 0 and kDimensionMismatch
// on length mismatch.
std::vector<double> reconstruct_equity(std::span<const double> assets,
                                       std::span<const double> liabilities,
                                       std::uint64_t rng_seed,
                                       double noise_sd = kEquityNoiseSd);

}  // namespace sysrisk
