#include "sysrisk/report_json.hpp"

#include <cmath>

namespace sysrisk {
namespace {

// NaN and ±inf have no JSON literal; they are written as null.
nlohmann::json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

}  // namespace

nlohmann::json to_json(const PsiReport& r) {
  return {{"psi_total", number(r.psi_total)},
          {"psi_1", number(r.psi_1)},
          {"psi_2", number(r.psi_2)},
          {"psi_3", number(r.psi_3)},
          {"psi_res", number(r.psi_res)},
          {"terms_used", r.terms_used},
          {"lambda", number(r.lambda)},
          {"truncation_bound", number(r.truncation_bound)},
          {"supercritical", r.supercritical}};
}

nlohmann::json to_json(const NetworkSummary& s) {
  return {{"n_banks", s.n_banks},
          {"edges", s.edges},
          {"mean_degree", number(s.mean_degree)},
          {"reciprocal_pairs", s.reciprocal_pairs},
          {"assets_liabilities_pearson", number(s.assets_liabilities_pearson)},
          {"total_assets", number(s.total_assets)},
          {"total_liabilities", number(s.total_liabilities)},
          {"max_assets", number(s.max_assets)},
          {"max_liabilities", number(s.max_liabilities)}};
}

nlohmann::json to_json(const AssortativityResult& a) {
  return {{"r", number(a.r)},
          {"variance", number(a.variance)},
          {"n_bins", a.n_bins},
          {"source_property", to_string(a.source_property)},
          {"target_property", to_string(a.target_property)},
          {"edges", a.edges},
          {"degenerate", a.degenerate}};
}

nlohmann::json to_json(const AnnealConfig& c) {
  nlohmann::json beta;
  if (c.beta.kind == BetaSchedule::Kind::kConstant) {
    beta = {{"schedule", "constant"}, {"value", c.beta.value}};
  } else {
    beta = {{"schedule", "geometric"}, {"beta0", c.beta.value}, {"factor", c.beta.factor}};
  }
  return {{"direction", to_string(c.direction)},
          {"beta", beta},
          {"beta_k", c.beta_k},
          {"beta_asym", c.beta_asym},
          {"sweeps", c.sweeps},
          {"trial_terms", c.trial_terms},
          {"final_terms", c.final_terms},
          {"seed", c.rng_seed},
          {"full_transfer_prob", c.full_transfer_prob},
          {"resync_interval", c.resync_interval},
          {"assortativity_bins", c.assortativity_bins},
          {"source_property", to_string(c.source_property)},
          {"target_property", to_string(c.target_property)}};
}

nlohmann::json to_json(const TwoTypeModel& m) {
  return {{"n1", m.n1}, {"n2", m.n2}, {"c1", m.c1}, {"c2", m.c2},
          {"kappa", m.kappa}, {"equity", m.equity}};
}

nlohmann::json to_json(const ShockRanges& r) {
  nlohmann::json min = nlohmann::json::array(), max = nlohmann::json::array(),
                 mean = nlohmann::json::array();
  for (std::size_t i = 0; i < r.min.size(); ++i) {
    min.push_back(number(r.min[i]));
    max.push_back(number(r.max[i]));
    mean.push_back(number(r.mean[i]));
  }
  return {{"samples", r.samples}, {"feasible_fraction", r.feasible_fraction},
          {"min", min}, {"max", max}, {"mean", mean}};
}

}  // namespace sysrisk
