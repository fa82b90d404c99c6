#include "sysrisk/generators.hpp"

#include <cmath>

#include "sysrisk/error.hpp"

namespace sysrisk {

std::string to_string(PopulationKind k) {
  switch (k) {
    case PopulationKind::kParetoUniform: return "pareto_uniform";
    case PopulationKind::kGrid: return "grid";
    case PopulationKind::kTwoType: return "two_type";
    case PopulationKind::kCustom: return "custom";
  }
  return "unknown";
}

PopulationKind parse_population_kind(const std::string& name) {
  for (auto k : {PopulationKind::kParetoUniform, PopulationKind::kGrid, PopulationKind::kTwoType,
                 PopulationKind::kCustom}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorCode::kInvalidSpec, "unknown population kind '" + name + "'");
}

void PopulationSpec::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::kInvalidSpec, m); };
  switch (kind) {
    case PopulationKind::kParetoUniform:
      if (n_banks < 2) fail("need at least 2 banks");
      if (!(pareto_exponent > 1.0)) fail("Pareto exponent must exceed 1");
      if (!(pareto_scale > 0.0)) fail("Pareto scale must be positive");
      if (!(leverage_low > 0.0) || !(leverage_high >= leverage_low) || !std::isfinite(leverage_high))
        fail("leverage interval must satisfy 0 < low <= high < inf");
      break;
    case PopulationKind::kGrid:
      if (n_banks < 2) fail("need at least 2 banks");
      if (!(rescale > 0.0)) fail("rescale factor must be positive");
      if (!(grid_low > 0.0) || !(grid_span >= 0.0)) fail("grid leverages must be positive");
      break;
    case PopulationKind::kTwoType:
      two_type.validate();
      break;
    case PopulationKind::kCustom:
      if (equity.size() != assets.size() || equity.size() != liabilities.size())
        fail("custom population vectors differ in length");
      break;
  }
}

double sample_pareto(Rng& rng, double exponent, double scale) {
  const double u = 1.0 - uniform01(rng);  // (0, 1]
  return scale * std::pow(u, -1.0 / exponent);
}

BankSet generate_population(const PopulationSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case PopulationKind::kParetoUniform: {
      Rng rng = make_rng(spec.rng_seed);
      std::vector<double> e(spec.n_banks), a(spec.n_banks);
      for (std::size_t i = 0; i < spec.n_banks; ++i) {
        e[i] = sample_pareto(rng, spec.pareto_exponent, spec.pareto_scale);
        const double lev =
            spec.leverage_low + (spec.leverage_high - spec.leverage_low) * uniform01(rng);
        a[i] = lev * e[i];
      }
      return BankSet::build(e, a, a);
    }
    case PopulationKind::kGrid: {
      const std::size_t n = spec.n_banks;
      std::vector<double> e(n, 1.0), a(n);
      for (std::size_t i = 0; i < n; ++i) {
        a[i] = spec.rescale * (spec.grid_low + spec.grid_span * static_cast<double>(i) /
                                                   static_cast<double>(n - 1));
      }
      return BankSet::build(e, a, a);
    }
    case PopulationKind::kTwoType:
      return two_type_bank_set(spec.two_type);
    case PopulationKind::kCustom:
      return BankSet::build(spec.equity, spec.assets, spec.liabilities);
  }
  throw Error(ErrorCode::kInvalidSpec, "unhandled population kind");
}

std::vector<double> reconstruct_equity(std::span<const double> assets,
                                       std::span<const double> liabilities,
                                       std::uint64_t rng_seed, double noise_sd) {
  if (assets.size() != liabilities.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "assets and liabilities differ in length");
  }
  if (!(noise_sd >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "noise sd must be >= 0");
  Rng rng = make_rng(rng_seed);
  std::vector<double> equity(assets.size());
  for (std::size_t i = 0; i < assets.size(); ++i) {
    if (!(assets[i] >= 0.0) || !(liabilities[i] >= 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "negative balance-sheet entry");
    }
    const double base = std::max(assets[i], liabilities[i]);
    if (base == 0.0) {
      throw Error(ErrorCode::kDegenerateBank,
                  "bank " + std::to_string(i) + " has no interbank assets or liabilities");
    }
    double xi = 1.0;
    if (noise_sd > 0.0) {
      do {
        xi = 1.0 + noise_sd * standard_normal(rng);
      } while (xi <= kEquityNoiseFloor);
    }
    equity[i] = base * kEquityMarkup * xi;
  }
  return equity;
}

}  // namespace sysrisk
