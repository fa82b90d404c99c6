#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sysrisk/core_model.hpp"

namespace sysrisk {

enum class NodeProperty {
  kLeverage,         // A_i / E_i
  kLiabilityRatio,   // L_i / E_i
  kEquity,
  kAssets,
  kLiabilities,
};

std::string to_string(NodeProperty p);
// Accepts the names produced by to_string; throws kInvalidArgument otherwise.
NodeProperty parse_node_property(const std::string& name);
std::vector<double> node_property_values(const BankSet& bs, NodeProperty p);

inline constexpr int kDefaultAssortativityBins = 10;

struct AssortativityResult {
  // NaN when `degenerate`.
  double r = 0.0;
  // Leave-one-edge-out jackknife: Σ_k (r_k − r)².
  double variance = 0.0;
  int n_bins = kDefaultAssortativityBins;
  NodeProperty source_property = NodeProperty::kLeverage;
  NodeProperty target_property = NodeProperty::kLeverage;
  std::size_t edges = 0;
  // All sources or all targets fell into a single class (σ_a σ_b = 0).
  bool degenerate = false;
};

// Directed support edges (α_ij > 0) in row-major order.
std::vector<std::pair<std::size_t, std::size_t>> support_edges(const DenseMatrix& alpha);

// Scalar assortativity of binned node values over directed support edges.
// Values are binned into n_bins equal-width classes spanning their observed
// range, each class labelled by its midpoint. Throws kInvalidArgument for
// fewer than 2 edges or 2 bins.
AssortativityResult scalar_assortativity(const DenseMatrix& alpha,
                                         std::span<const double> source_values,
                                         std::span<const double> target_values, int n_bins,
                                         bool with_variance = true);

AssortativityResult scalar_assortativity(const ExposureMatrix& m, NodeProperty source,
                                         NodeProperty target,
                                         int n_bins = kDefaultAssortativityBins,
                                         bool with_variance = true);

// r without the jackknife; cheap enough to call once per optimizer sweep.
// Returns NaN when degenerate or when there are fewer than 2 edges.
double assortativity_coefficient(const DenseMatrix& alpha, std::span<const double> source_values,
                                 std::span<const double> target_values, int n_bins);

// Pearson correlation of source vs target values across support edges, no
// binning. NaN when either side has zero variance or there are < 2 edges.
double edge_pearson(const ExposureMatrix& m, NodeProperty source, NodeProperty target);

// Plain Pearson correlation of two equal-length samples; NaN if degenerate.
double pearson(std::span<const double> x, std::span<const double> y);

struct NetworkSummary {
  std::size_t n_banks = 0;
  std::size_t edges = 0;
  double mean_degree = 0.0;
  // Unordered pairs with α_ij α_ji > 0.
  std::size_t reciprocal_pairs = 0;
  double assets_liabilities_pearson = 0.0;
  double total_assets = 0.0;
  double total_liabilities = 0.0;
  double max_assets = 0.0;
  double max_liabilities = 0.0;
};

// Balance-sheet totals are reported in currency units.
NetworkSummary network_summary(const ExposureMatrix& m);

// Σ_ij Θ(α_ij) / N
double mean_degree(const DenseMatrix& alpha);
// Σ_ij α_ij α_ji / Σ_ij α_ij²; 0 for an all-zero matrix.
double symmetry_ratio(const DenseMatrix& alpha);

}  // namespace sysrisk
