#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "sysrisk/core_model.hpp"

namespace sysrisk {

struct LoadOptions {
  // Keep only the largest strongly connected component.
  bool largest_scc = false;
  // Replace each reciprocal pair by one edge carrying the difference.
  bool net_reciprocal = false;
  // Used only when the nodes file has no equity column.
  std::uint64_t equity_seed = 1;
  double equity_noise_sd = 0.2;
};

struct LoadedNetwork {
  std::vector<std::string> ids;
  std::shared_ptr<const BankSet> banks;
  ExposureMatrix exposures;
  bool equity_reconstructed = false;
  std::size_t dropped_nodes = 0;
  std::size_t netted_pairs = 0;
};

// Nodes: header with columns id, assets, liabilities and optionally equity
// (any order). Edges: header source,target,exposure in currency units.
// Balance sheets of the loaded network are the edge row/column sums; the
// file's assets/liabilities columns must agree with them unless the SCC or
// netting options changed the edge set.
LoadedNetwork load_network(const std::filesystem::path& nodes_path,
                           const std::filesystem::path& edges_path,
                           const LoadOptions& options = {});

LoadedNetwork load_network(std::istream& nodes, const std::string& nodes_name,
                           std::istream& edges, const std::string& edges_name,
                           const LoadOptions& options = {});

// Components of a directed graph given as adjacency lists, each sorted, in
// order of their smallest member.
std::vector<std::vector<std::size_t>> strongly_connected_components(
    const std::vector<std::vector<std::size_t>>& adjacency);

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

void write_nodes_csv(std::ostream& out, const std::vector<std::string>& ids, const BankSet& bs);
// Support edges in currency units (α_ij · Σ E).
void write_edges_csv(std::ostream& out, const std::vector<std::string>& ids,
                     const ExposureMatrix& m);

// "0", "1", ... for generated populations.
std::vector<std::string> default_ids(std::size_t n);

}  // namespace sysrisk
