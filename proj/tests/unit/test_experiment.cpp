#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "support.hpp"

#include "sysrisk/error.hpp"
#include "sysrisk/experiment.hpp"
#include "sysrisk/network_io.hpp"
#include "sysrisk/report_json.hpp"

using namespace sysrisk;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("sysrisk_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

json small_doc() {
  return json::parse(R"({
    "label": "t",
    "seed": 5,
    "population": {"kind": "pareto_uniform", "n_banks": 8},
    "chains": [
      {"label": "lo", "direction": "minimize", "beta": 1e6, "beta_k": 0.1, "beta_asym": 2.0,
       "sweeps": 12, "trial_terms": 20, "final_terms": 50},
      {"label": "hi", "direction": "maximize", "beta": {"schedule": "geometric"},
       "sweeps": 12, "trial_terms": 20, "final_terms": 50}
    ]
  })");
}

ErrorCode parse_code(const json& doc) {
  try {
    parse_experiment_config(doc);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("config parsing fills every field") {
  const auto cfg = parse_experiment_config(small_doc());
  CHECK(cfg.label == "t");
  CHECK(cfg.seed == 5);
  REQUIRE(cfg.population.has_value());
  CHECK(cfg.population->n_banks == 8);
  REQUIRE(cfg.chains.size() == 2);
  CHECK(cfg.chains[0].anneal.direction == Direction::kMinimize);
  CHECK(cfg.chains[0].anneal.beta_asym == 2.0);
  CHECK(cfg.chains[1].anneal.beta.kind == BetaSchedule::Kind::kGeometric);
  CHECK(cfg.chains[0].anneal.rng_seed != cfg.chains[1].anneal.rng_seed);
}

TEST_CASE("strict parsing rejects unknown keys and bad values") {
  auto doc = small_doc();
  doc["colour"] = "red";
  CHECK(parse_code(doc) == ErrorCode::kParseError);

  doc = small_doc();
  doc["chains"][0]["temperature"] = 1;
  CHECK(parse_code(doc) == ErrorCode::kParseError);

  doc = small_doc();
  doc["population"]["n_bank"] = 8;
  CHECK(parse_code(doc) == ErrorCode::kParseError);

  doc = small_doc();
  doc["chains"][0]["sweeps"] = "many";
  CHECK(parse_code(doc) == ErrorCode::kParseError);

  doc = small_doc();
  doc["chains"][1]["label"] = "lo";
  CHECK(parse_code(doc) == ErrorCode::kParseError);

  doc = small_doc();
  doc["network"] = {{"nodes", "/nonexistent/n.csv"}, {"edges", "/nonexistent/e.csv"}};
  CHECK(parse_code(doc) == ErrorCode::kParseError);
  doc.erase("population");
  CHECK(parse_code(doc) == ErrorCode::kParseError);

  doc = small_doc();
  doc["chains"][0]["trial_terms"] = 500;
  CHECK_THROWS_AS(parse_experiment_config(doc), Error);
}

TEST_CASE("overrides replace seeds and terms") {
  auto cfg = parse_experiment_config(small_doc());
  const auto before = cfg.chains[0].anneal.rng_seed;
  Overrides o;
  o.seed = 99;
  o.trial_terms = 10;
  o.final_terms = 40;
  o.output_dir = "/tmp/x";
  apply_overrides(cfg, o);
  CHECK(cfg.seed == 99);
  CHECK(cfg.chains[0].anneal.rng_seed != before);
  CHECK(cfg.chains[0].anneal.trial_terms == 10);
  CHECK(cfg.chains[1].anneal.final_terms == 40);
  CHECK(cfg.output_dir == fs::path("/tmp/x"));
}

TEST_CASE("runs emit every artifact and rerun bit-identically") {
  auto cfg = parse_experiment_config(small_doc());
  const fs::path d1 = fresh_dir("run1"), d2 = fresh_dir("run2");
  cfg.output_dir = d1;
  const auto out1 = run_experiment(cfg);
  cfg.output_dir = d2;
  run_experiment(cfg);
  REQUIRE(out1.size() == 2);
  for (const std::string label : {"lo", "hi"}) {
    for (const std::string stem : {"trace_", "result_", "network_", "nodes_"}) {
      const std::string ext = stem == "result_" ? ".json" : ".csv";
      const fs::path f = stem + label + ext;
      REQUIRE(fs::exists(d1 / f));
      CHECK(slurp(d1 / f) == slurp(d2 / f));
    }
    CHECK(fs::exists(d1 / ("timing_" + label + ".json")));

    std::istringstream trace(slurp(d1 / ("trace_" + label + ".csv")));
    std::string line;
    std::getline(trace, line);
    CHECK(line == kTraceHeader);
    int rows = 0;
    while (std::getline(trace, line)) rows += !line.empty();
    CHECK(rows == 12);

    const json result = json::parse(slurp(d1 / ("result_" + label + ".json")));
    CHECK(result.at("schema_version") == kResultSchemaVersion);
    CHECK(result.contains("psi_report"));
    CHECK(result.contains("network_summary"));
    CHECK(result.contains("assortativity"));
    CHECK(result.contains("config"));
    CHECK(result.contains("seed"));
  }
  CHECK(out1[1].report.psi_total > out1[0].report.psi_total);
}

TEST_CASE("emitted networks reload to the reported psi") {
  auto cfg = parse_experiment_config(small_doc());
  cfg.output_dir = fresh_dir("reload");
  for (const auto& o : run_experiment(cfg)) {
    const auto net = load_network(o.nodes_file, o.network_file);
    CHECK(std::abs(psi_full(net.exposures, 50).psi_total - o.report.psi_total) < 1e-12);
  }
}

TEST_CASE("network-sourced experiments start from the loaded matrix") {
  const fs::path dir = fresh_dir("netsrc");
  auto bs = testing::pareto_banks(9, 3);
  const auto m = testing::random_feasible(bs, 1000, 3);
  {
    std::ofstream n(dir / "nodes.csv"), e(dir / "edges.csv");
    write_nodes_csv(n, default_ids(9), *bs);
    write_edges_csv(e, default_ids(9), m);
  }
  json doc = small_doc();
  doc.erase("population");
  doc["network"] = {{"nodes", "nodes.csv"}, {"edges", "edges.csv"}};
  doc["output_dir"] = "out";
  std::ofstream(dir / "config.json") << doc.dump();
  const auto cfg = load_experiment_config(dir / "config.json");
  CHECK(cfg.output_dir == dir / "out");
  const auto out = run_experiment(cfg);
  CHECK(out.size() == 2);
  CHECK(out[0].n_banks == 9);
  CHECK(fs::exists(dir / "out" / "trace_lo.csv"));
}

TEST_CASE("scaling batch writes one row per size and chain") {
  json doc = small_doc();
  doc["population"] = {{"kind", "grid"}};
  doc["scaling"] = {{"sizes", {6, 8}}};
  auto cfg = parse_experiment_config(doc);
  cfg.output_dir = fresh_dir("scaling");
  const auto out = run_scaling(cfg);
  CHECK(out.size() == 4);
  CHECK(fs::exists(cfg.output_dir / "trace_lo_N6.csv"));
  CHECK(fs::exists(cfg.output_dir / "result_hi_N8.json"));
  std::istringstream table(slurp(cfg.output_dir / "scaling_t.csv"));
  std::string line;
  int rows = -1;
  while (std::getline(table, line)) rows += !line.empty();
  CHECK(rows == 4);
}

}  // TEST_SUITE
