#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "support.hpp"

#include "sysrisk/error.hpp"
#include "sysrisk/network_io.hpp"

using namespace sysrisk;
using doctest::Approx;

namespace {

LoadedNetwork load(const std::string& nodes, const std::string& edges, LoadOptions opts = {}) {
  std::istringstream n(nodes), e(edges);
  return load_network(n, "nodes.csv", e, "edges.csv", opts);
}

template <class Fn>
const ParseError capture_parse(Fn fn) {
  try {
    fn();
  } catch (const ParseError& e) {
    return e;
  }
  FAIL("expected ParseError");
  return ParseError(ErrorCode::kParseError, "", 0, "");
}

const char* kTriangleNodes =
    "id,equity,assets,liabilities\n"
    "a,10,3,5\n"
    "b,20,4,3\n"
    "c,15,5,4\n";
const char* kTriangleEdges =
    "source,target,exposure\n"
    "a,b,3\n"
    "b,c,4\n"
    "c,a,5\n";

}  // namespace

TEST_SUITE("network-io") {

TEST_CASE("three-node cycle loads with or without the SCC restriction") {
  const auto plain = load(kTriangleNodes, kTriangleEdges);
  LoadOptions scc;
  scc.largest_scc = true;
  const auto restricted = load(kTriangleNodes, kTriangleEdges, scc);
  CHECK(plain.ids == std::vector<std::string>{"a", "b", "c"});
  CHECK(restricted.ids == plain.ids);
  CHECK(restricted.dropped_nodes == 0);
  CHECK(restricted.exposures.alpha() == plain.exposures.alpha());
  CHECK(plain.exposures(0, 1) == Approx(3.0 / 45.0));
  CHECK(plain.banks->equity() == std::vector<double>{10, 20, 15});
  CHECK_FALSE(plain.equity_reconstructed);
}

TEST_CASE("equal reciprocal edges cancel when netted") {
  const char* nodes = "id,equity,assets,liabilities\nx,1,2,2\ny,1,2,2\n";
  const char* edges = "source,target,exposure\nx,y,2\ny,x,2\n";
  LoadOptions opts;
  opts.net_reciprocal = true;
  const auto net = load(nodes, edges, opts);
  CHECK(net.netted_pairs == 1);
  for (double v : net.exposures.alpha().data()) CHECK(v == 0.0);

  const char* uneven = "source,target,exposure\nx,y,5\ny,x,2\n";
  const char* uneven_nodes = "id,equity,assets,liabilities\nx,1,5,2\ny,1,2,5\n";
  const auto u = load(uneven_nodes, uneven, opts);
  CHECK(u.exposures(0, 1) == Approx(3.0 / 2.0));
  CHECK(u.exposures(1, 0) == 0.0);
  CHECK(u.banks->assets()[0] == 3.0);
}

TEST_CASE("largest SCC drops the dangling nodes") {
  const char* nodes =
      "id,equity,assets,liabilities\n"
      "a,1,1,1\nb,1,1,1\nc,1,1,1\nd,1,1,0\ne,1,0,1\n";
  const char* edges =
      "source,target,exposure\n"
      "a,b,1\nb,c,1\nc,a,1\nd,e,1\n";
  LoadOptions opts;
  opts.largest_scc = true;
  const auto net = load(nodes, edges, opts);
  CHECK(net.ids == std::vector<std::string>{"a", "b", "c"});
  CHECK(net.dropped_nodes == 2);
  CHECK(validate_exposures(net.exposures).ok());
}

TEST_CASE("Tarjan components") {
  // 0→1→2→0, 2→3, 3→4→3, 5 alone.
  const std::vector<std::vector<std::size_t>> adj = {{1}, {2}, {0, 3}, {4}, {3}, {}};
  const auto comps = strongly_connected_components(adj);
  REQUIRE(comps.size() == 3);
  CHECK(comps[0] == std::vector<std::size_t>{0, 1, 2});
  CHECK(comps[1] == std::vector<std::size_t>{3, 4});
  CHECK(comps[2] == std::vector<std::size_t>{5});
}

TEST_CASE("errors carry the offending line") {
  const auto unknown = capture_parse([] {
    load(kTriangleNodes, "source,target,exposure\na,b,3\nb,zz,4\n");
  });
  CHECK(unknown.code() == ErrorCode::kUnknownNodeId);
  CHECK(unknown.line() == 3);
  CHECK(std::string(unknown.what()).find("edges.csv:3") != std::string::npos);

  CHECK(capture_parse([] { load(kTriangleNodes, "source,target,exposure\na,a,3\n"); }).code() ==
        ErrorCode::kSelfLoopEdge);
  const auto neg = capture_parse([] { load(kTriangleNodes, "source,target,exposure\n\na,b,-3\n"); });
  CHECK(neg.code() == ErrorCode::kNegativeExposure);
  CHECK(neg.line() == 3);
  CHECK(capture_parse([] { load(kTriangleNodes, "source,target,exposure\na,b,3\na,b,1\n"); })
            .code() == ErrorCode::kDuplicateEdge);
  CHECK(capture_parse([] { load(kTriangleNodes, "source,target\na,b\n"); }).code() ==
        ErrorCode::kParseError);
  CHECK(capture_parse([] { load(kTriangleNodes, "source,target,exposure\na,b,abc\n"); }).line() ==
        2);
  CHECK(capture_parse([] {
          load("id,equity,assets,liabilities\na,1,1,1\na,1,1,1\n", kTriangleEdges);
        }).code() == ErrorCode::kParseError);
  CHECK(capture_parse([] { load("id,equity,assets,colour\na,1,1,1\n", kTriangleEdges); }).line() ==
        1);
}

TEST_CASE("margins in the nodes file must match the edges") {
  const char* nodes =
      "id,equity,assets,liabilities\n"
      "a,10,3,5\nb,20,4,3\nc,15,5,5\n";
  try {
    load(nodes, kTriangleEdges);
    FAIL("expected MarginMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMarginMismatch);
  }
}

TEST_CASE("missing equity column triggers reconstruction") {
  const char* nodes = "liabilities,id,assets\n5,a,3\n3,b,4\n4,c,5\n";
  LoadOptions opts;
  opts.equity_seed = 4;
  const auto net = load(nodes, kTriangleEdges, opts);
  CHECK(net.equity_reconstructed);
  CHECK(net.banks->equity() ==
        reconstruct_equity(std::vector<double>{3, 4, 5}, std::vector<double>{5, 3, 4}, 4));
  opts.equity_noise_sd = 0.0;
  CHECK(load(nodes, kTriangleEdges, opts).banks->equity() == std::vector<double>{6.25, 5, 6.25});
}

TEST_CASE("psi over reconstructed equity samples has a finite spread") {
  auto bs = testing::pareto_banks(20, 2);
  const ExposureMatrix m = testing::random_feasible(bs, 4000, 2);
  std::ostringstream nodes, edges;
  nodes << "id,assets,liabilities\n";
  for (std::size_t i = 0; i < 20; ++i)
    nodes << i << ',' << format_double(m.alpha().row_sums()[i] * bs->total_equity()) << ','
          << format_double(m.alpha().column_sums()[i] * bs->total_equity()) << '\n';
  write_edges_csv(edges, default_ids(20), m);
  std::vector<double> psi;
  for (std::uint64_t s = 0; s < 100; ++s) {
    LoadOptions opts;
    opts.equity_seed = s;
    psi.push_back(psi_full(load(nodes.str(), edges.str(), opts).exposures, 200).psi_total);
  }
  double mean = 0, var = 0;
  for (double v : psi) mean += v;
  mean /= 100;
  for (double v : psi) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / 99);
  CHECK(std::isfinite(mean));
  CHECK(mean > 1.0);
  CHECK(sd > 0.0);
  CHECK(sd < mean);
}

TEST_CASE("written networks reload to the same psi") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto bs = testing::pareto_banks(25, seed);
    const ExposureMatrix m = testing::random_feasible(bs, 10000, seed);
    std::ostringstream nodes, edges;
    const auto ids = default_ids(25);
    write_nodes_csv(nodes, ids, *bs);
    write_edges_csv(edges, ids, m);
    const auto back = load(nodes.str(), edges.str());
    CHECK(std::abs(psi_full(back.exposures, 200).psi_total - psi_full(m, 200).psi_total) < 1e-12);
    CHECK(back.banks->equity() == bs->equity());
  }
}

TEST_CASE("round-trip-safe number formatting") {
  Rng rng = make_rng(1);
  for (int k = 0; k < 1000; ++k) {
    const double v = std::ldexp(uniform01(rng), static_cast<int>(uniform_index(rng, 80)) - 40);
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(std::nan("")) == "nan");
}

TEST_CASE("file loading reports missing files") {
  try {
    load_network("/nonexistent/nodes.csv", "/nonexistent/edges.csv");
    FAIL("expected IoError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIoError);
  }
}

}  // TEST_SUITE
