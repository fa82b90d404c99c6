#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sysrisk/amplification.hpp"
#include "sysrisk/core_model.hpp"
#include "sysrisk/metrics.hpp"
#include "sysrisk/random.hpp"

namespace sysrisk {

enum class Direction { kMinimize, kMaximize };

std::string to_string(Direction d);
Direction parse_direction(const std::string& name);

// β as a function of the sweep index n.
struct BetaSchedule {
  enum class Kind { kConstant, kGeometric };

  Kind kind = Kind::kConstant;
  // Constant β, or β₀ for the geometric schedule. A non-positive β₀ means
  // the default 10·N².
  double value = 1e6;
  // Geometric schedule: β = β₀ · factor^{n/n_max}.
  double factor = 100.0;

  static BetaSchedule constant(double beta) { return {Kind::kConstant, beta, 100.0}; }
  static BetaSchedule geometric(double beta0 = 0.0, double factor = 100.0) {
    return {Kind::kGeometric, beta0, factor};
  }

  double at(int sweep, int n_max, std::size_t n_banks) const;
};

struct AnnealConfig {
  Direction direction = Direction::kMinimize;
  BetaSchedule beta = BetaSchedule::constant(1e6);
  double beta_k = 0.0;
  double beta_asym = 0.0;
  int sweeps = 1000;
  int trial_terms = terms::kIllustrativeTrial;
  int final_terms = terms::kIllustrativeFinal;
  std::uint64_t rng_seed = 1;
  // Probability that a proposal moves the whole donor minimum m_d.
  double full_transfer_prob = 0.5;
  // Sweeps between exact re-projections of the margins.
  int resync_interval = 100;
  int assortativity_bins = kDefaultAssortativityBins;
  NodeProperty source_property = NodeProperty::kLiabilityRatio;
  NodeProperty target_property = NodeProperty::kLeverage;

  // Throws kInvalidArgument on an inconsistent configuration.
  void validate() const;
};

struct TraceRecord {
  int n = 0;
  double psi = 0.0;
  double lambda = 0.0;
  double assortativity = 0.0;
  double mean_degree = 0.0;
  double acceptance_rate = 0.0;
};

using AnnealTrace = std::vector<TraceRecord>;

// α → α + D(i1,j1,i2,j2): +d at (i1,j1) and (i2,j2), −d at the donor cells
// (i1,j2) and (i2,j1).
struct DMove {
  std::size_t i1 = 0, j1 = 0, i2 = 0, j2 = 0;
  double d = 0.0;
  // Donor cells were (numerically) empty; the proposal is rejected outright.
  bool null = false;
};

struct EliminationStats {
  int paired_moves = 0;
  int final_moves = 0;
};

// α̃_ij = a_i l_j / Σ_k a_k (diagonal included).
DenseMatrix proportional_fill(const BankSet& bs);

// Removes the diagonal of a matrix with consistent margins using margin-
// preserving moves: pairs of the two largest diagonal entries first, then a
// lone remaining entry against the largest eligible off-diagonal cell.
// Restricted to `block` when given (both rows and columns). Throws
// kInfeasibleMargins when no eligible cell is left.
EliminationStats eliminate_diagonal(DenseMatrix& alpha, double zero_threshold,
                                    std::span<const std::size_t> block = {});

// Proportional fill followed by diagonal elimination. Throws kInfeasibleMargins.
ExposureMatrix initial_feasible_matrix(std::shared_ptr<const BankSet> bs);

// Draws a move with i1≠i2, j1≠j2 and all four cells off-diagonal (needs N ≥ 4).
DMove propose_d_move(const DenseMatrix& alpha, double zero_threshold, double full_transfer_prob,
                     Rng& rng);

// Applies a non-null move. A donor emptied by a full transfer is set to
// exactly 0, as is any donor left below `zero_threshold`.
void apply_d_move(DenseMatrix& alpha, const DMove& move, double zero_threshold = 0.0);

// F = ±Ψ − β_k k̄ − β_asym Σα_ijα_ji/Σα_ij², with Ψ at cfg.trial_terms.
double objective(const ExposureMatrix& m, const AnnealConfig& cfg);

// min{1, exp(β ΔF)} acceptance; draws from `rng` only when ΔF < 0.
bool metropolis_accept(double delta_f, double beta, Rng& rng);

struct AnnealResult {
  ExposureMatrix matrix;
  AnnealTrace trace;
  PsiReport report;
  std::uint64_t proposals = 0;
  std::uint64_t null_proposals = 0;
  std::uint64_t accepted = 0;
};

using SweepObserver = std::function<void(const TraceRecord&)>;

// Runs cfg.sweeps sweeps of N² proposals each, recording one trace row per
// sweep. `observer` (optional) sees every row as soon as it is produced.
AnnealResult anneal(std::shared_ptr<const BankSet> bs, const AnnealConfig& cfg,
                    std::optional<ExposureMatrix> initial = std::nullopt,
                    const SweepObserver& observer = {});

}  // namespace sysrisk
