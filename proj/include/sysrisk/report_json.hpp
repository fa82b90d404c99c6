#pragma once

#include "json.hpp"

#include "sysrisk/amplification.hpp"
#include "sysrisk/analytic.hpp"
#include "sysrisk/metrics.hpp"
#include "sysrisk/optimizer.hpp"
#include "sysrisk/propagation.hpp"

namespace sysrisk {

// Bumped whenever a field of an emitted JSON document changes meaning.
inline constexpr int kResultSchemaVersion = 1;

nlohmann::json to_json(const PsiReport& r);
nlohmann::json to_json(const NetworkSummary& s);
nlohmann::json to_json(const AssortativityResult& a);
nlohmann::json to_json(const AnnealConfig& c);
nlohmann::json to_json(const TwoTypeModel& m);
nlohmann::json to_json(const ShockRanges& r);

}  // namespace sysrisk
