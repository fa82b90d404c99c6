#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sysrisk/core_model.hpp"

namespace sysrisk {

// Distress h_i ≥ 1 means bank i has lost all its equity.
inline constexpr double kBankruptcyLevel = 1.0;
// Propagation stops once any |h_i| exceeds this.
inline constexpr double kDivergenceGuard = 1e12;
// h∞ is only defined for λ below 1 − kSupercriticalMargin.
inline constexpr double kSupercriticalMargin = 1e-9;

struct PropagationState {
  int t = 1;
  std::vector<double> h;
  // H(t) = Σ_i h_i(t) e_i
  double aggregate = 0.0;
};

struct PropagationResult {
  // states[k] is time t = k + 1; states.front() is the initial shock.
  std::vector<PropagationState> states;
  // Per bank: h_i reached kBankruptcyLevel at some recorded t.
  std::vector<bool> bankrupt;
  // True when the divergence guard stopped the recursion early; `states`
  // then ends at the last finite state.
  bool overflowed = false;
};

// h(t) = Σ_{s<t} Λ^s h(1) for t = 1..t_max, accumulated as v ← Λv.
// Distress is not clamped at 1. Throws kInvalidArgument for negative shocks,
// t_max < 1 or a size mismatch.
PropagationResult propagate(const LambdaMatrix& lm, std::span<const double> h1, int t_max);

// Solves (I − Λ) h∞ = h(1). Throws kSupercriticalSystem if λ ≥ 1 − 1e-9.
std::vector<double> h_infinity_exact(const LambdaMatrix& lm, std::span<const double> h1);

struct InitialShock {
  std::vector<double> h1;
  // feasible[i] is false when h1_i < 0, i.e. the target is unreachable by a
  // non-negative shock.
  std::vector<bool> feasible;

  bool all_feasible() const;
};

// h(1) = (I − Λ) h∞ by a matrix-vector product.
InitialShock initial_shock_from_target(const LambdaMatrix& lm, std::span<const double> h_inf);

struct ShockRanges {
  std::vector<double> min, max, mean;
  // Fraction of samples whose h(1) is non-negative in every component.
  double feasible_fraction = 0.0;
  std::uint64_t samples = 0;
};

// Draws h∞ with i.i.d. U[0,1) components, maps each draw through
// initial_shock_from_target and summarises the resulting h(1). Sample k uses
// its own generator seeded from (rng_seed, k), so the result does not depend
// on the thread count.
ShockRanges sample_no_bankruptcy_shocks(const LambdaMatrix& lm, std::uint64_t n_samples,
                                        std::uint64_t rng_seed);

namespace serial {
ShockRanges sample_no_bankruptcy_shocks(const LambdaMatrix& lm, std::uint64_t n_samples,
                                        std::uint64_t rng_seed);
}  // namespace serial

}  // namespace sysrisk
