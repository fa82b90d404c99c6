#include "sysrisk/experiment.hpp"

#include <chrono>
#include <exception>
#include <fstream>
#include <set>

#include "sysrisk/error.hpp"
#include "sysrisk/report_json.hpp"

namespace sysrisk {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

[[noreturn]] void parse_fail(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::kParseError, "config " + where + ": " + what);
}

void check_keys(const json& obj, const std::string& where, std::set<std::string> allowed) {
  if (!obj.is_object()) parse_fail(where, "expected an object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) parse_fail(where, "unknown key '" + key + "'");
}

template <typename T>
T get(const json& obj, const std::string& key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    parse_fail(where + "." + key, e.what());
  }
}

template <typename T>
void maybe(const json& obj, const std::string& key, const std::string& where, T& out) {
  if (obj.contains(key)) out = get<T>(obj, key, where);
}

PopulationSpec parse_population(const json& p, std::uint64_t seed, bool& explicit_seed) {
  const std::string where = "population";
  check_keys(p, where,
             {"kind", "n_banks", "seed", "pareto_exponent", "pareto_scale", "leverage_low",
              "leverage_high", "grid_low", "grid_span", "rescale", "two_type", "equity", "assets",
              "liabilities"});
  PopulationSpec spec;
  spec.kind = parse_population_kind(get<std::string>(p, "kind", where));
  spec.rng_seed = seed;
  explicit_seed = p.contains("seed");
  maybe(p, "seed", where, spec.rng_seed);
  maybe(p, "n_banks", where, spec.n_banks);
  maybe(p, "pareto_exponent", where, spec.pareto_exponent);
  maybe(p, "pareto_scale", where, spec.pareto_scale);
  maybe(p, "leverage_low", where, spec.leverage_low);
  maybe(p, "leverage_high", where, spec.leverage_high);
  maybe(p, "grid_low", where, spec.grid_low);
  maybe(p, "grid_span", where, spec.grid_span);
  maybe(p, "rescale", where, spec.rescale);
  maybe(p, "equity", where, spec.equity);
  maybe(p, "assets", where, spec.assets);
  maybe(p, "liabilities", where, spec.liabilities);
  if (p.contains("two_type")) {
    const auto& t = p.at("two_type");
    check_keys(t, "population.two_type", {"n1", "n2", "c1", "c2", "kappa", "equity"});
    auto& m = spec.two_type;
    m.n1 = get<std::size_t>(t, "n1", "population.two_type");
    m.n2 = get<std::size_t>(t, "n2", "population.two_type");
    m.c1 = get<double>(t, "c1", "population.two_type");
    m.c2 = get<double>(t, "c2", "population.two_type");
    maybe(t, "kappa", "population.two_type", m.kappa);
    maybe(t, "equity", "population.two_type", m.equity);
  }
  spec.validate();
  return spec;
}

BetaSchedule parse_beta(const json& b, const std::string& where) {
  if (b.is_number()) return BetaSchedule::constant(b.get<double>());
  check_keys(b, where, {"schedule", "value", "beta0", "factor"});
  const auto kind = get<std::string>(b, "schedule", where);
  if (kind == "constant") return BetaSchedule::constant(get<double>(b, "value", where));
  if (kind == "geometric") {
    BetaSchedule s = BetaSchedule::geometric();
    maybe(b, "beta0", where, s.value);
    maybe(b, "factor", where, s.factor);
    return s;
  }
  parse_fail(where, "unknown schedule '" + kind + "'");
}

ChainSpec parse_chain(const json& c, std::size_t idx) {
  const std::string where = "chains[" + std::to_string(idx) + "]";
  check_keys(c, where,
             {"label", "direction", "beta", "beta_k", "beta_asym", "sweeps", "trial_terms",
              "final_terms", "seed", "full_transfer_prob", "resync_interval"});
  ChainSpec spec;
  spec.label = get<std::string>(c, "label", where);
  if (spec.label.empty() || spec.label.find_first_of("/\\ ") != std::string::npos)
    parse_fail(where, "label must be non-empty without spaces or slashes");
  auto& a = spec.anneal;
  a.direction = parse_direction(get<std::string>(c, "direction", where));
  if (c.contains("beta")) a.beta = parse_beta(c.at("beta"), where + ".beta");
  maybe(c, "beta_k", where, a.beta_k);
  maybe(c, "beta_asym", where, a.beta_asym);
  a.sweeps = get<int>(c, "sweeps", where);
  maybe(c, "trial_terms", where, a.trial_terms);
  maybe(c, "final_terms", where, a.final_terms);
  spec.explicit_seed = c.contains("seed");
  maybe(c, "seed", where, a.rng_seed);
  maybe(c, "full_transfer_prob", where, a.full_transfer_prob);
  maybe(c, "resync_interval", where, a.resync_interval);
  return spec;
}

void derive_seeds(ExperimentConfig& cfg) {
  if (cfg.population && !cfg.explicit_population_seed) cfg.population->rng_seed = cfg.seed;
  for (std::size_t k = 0; k < cfg.chains.size(); ++k)
    if (!cfg.chains[k].explicit_seed) cfg.chains[k].anneal.rng_seed = mix_seed(cfg.seed, k);
}

}  // namespace

ExperimentConfig parse_experiment_config(const json& doc, const fs::path& base_dir) {
  check_keys(doc, "root",
             {"label", "output_dir", "seed", "population", "network", "metrics", "chains",
              "scaling"});
  ExperimentConfig cfg;
  cfg.source = doc;
  maybe(doc, "label", "root", cfg.label);
  if (doc.contains("output_dir")) {
    cfg.output_dir = get<std::string>(doc, "output_dir", "root");
    if (cfg.output_dir.is_relative()) cfg.output_dir = base_dir / cfg.output_dir;
  }
  maybe(doc, "seed", "root", cfg.seed);

  if (doc.contains("population") == doc.contains("network"))
    parse_fail("root", "exactly one of 'population' or 'network' is required");
  if (doc.contains("population"))
    cfg.population = parse_population(doc.at("population"), cfg.seed, cfg.explicit_population_seed);
  if (doc.contains("network")) {
    const auto& n = doc.at("network");
    check_keys(n, "network",
               {"nodes", "edges", "largest_scc", "net_reciprocal", "equity_seed", "equity_noise_sd"});
    NetworkSource src;
    src.nodes = get<std::string>(n, "nodes", "network");
    src.edges = get<std::string>(n, "edges", "network");
    if (src.nodes.is_relative()) src.nodes = base_dir / src.nodes;
    if (src.edges.is_relative()) src.edges = base_dir / src.edges;
    for (const auto& p : {src.nodes, src.edges})
      if (!fs::exists(p)) parse_fail("network", "file does not exist: " + p.string());
    src.options.equity_seed = cfg.seed;
    maybe(n, "largest_scc", "network", src.options.largest_scc);
    maybe(n, "net_reciprocal", "network", src.options.net_reciprocal);
    maybe(n, "equity_seed", "network", src.options.equity_seed);
    maybe(n, "equity_noise_sd", "network", src.options.equity_noise_sd);
    cfg.network = src;
  }
  if (doc.contains("metrics")) {
    const auto& m = doc.at("metrics");
    check_keys(m, "metrics", {"assortativity_bins", "source_property", "target_property"});
    maybe(m, "assortativity_bins", "metrics", cfg.assortativity_bins);
    if (m.contains("source_property"))
      cfg.source_property = parse_node_property(get<std::string>(m, "source_property", "metrics"));
    if (m.contains("target_property"))
      cfg.target_property = parse_node_property(get<std::string>(m, "target_property", "metrics"));
  }
  if (!doc.contains("chains") || !doc.at("chains").is_array() || doc.at("chains").empty())
    parse_fail("root", "'chains' must be a non-empty array");
  std::set<std::string> labels;
  for (std::size_t k = 0; k < doc.at("chains").size(); ++k) {
    auto chain = parse_chain(doc.at("chains")[k], k);
    if (!labels.insert(chain.label).second) parse_fail("chains", "duplicate label " + chain.label);
    cfg.chains.push_back(std::move(chain));
  }
  if (doc.contains("scaling")) {
    const auto& s = doc.at("scaling");
    check_keys(s, "scaling", {"sizes"});
    cfg.scaling_sizes = get<std::vector<std::size_t>>(s, "sizes", "scaling");
    if (cfg.scaling_sizes.empty()) parse_fail("scaling", "'sizes' must not be empty");
    if (!cfg.population) parse_fail("scaling", "scaling needs a population spec");
  }
  for (auto& c : cfg.chains) {
    c.anneal.assortativity_bins = cfg.assortativity_bins;
    c.anneal.source_property = cfg.source_property;
    c.anneal.target_property = cfg.target_property;
    c.anneal.validate();
  }
  derive_seeds(cfg);
  return cfg;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
  return parse_experiment_config(doc, path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

void apply_overrides(ExperimentConfig& cfg, const Overrides& o) {
  if (o.seed) {
    cfg.seed = *o.seed;
    if (cfg.network) cfg.network->options.equity_seed = *o.seed;
    cfg.explicit_population_seed = false;
    for (auto& c : cfg.chains) c.explicit_seed = false;
  }
  for (auto& c : cfg.chains) {
    if (o.trial_terms) c.anneal.trial_terms = *o.trial_terms;
    if (o.final_terms) c.anneal.final_terms = *o.final_terms;
    c.anneal.validate();
  }
  if (o.output_dir) cfg.output_dir = *o.output_dir;
  derive_seeds(cfg);
}

namespace {

struct Job {
  std::string label;
  std::shared_ptr<const BankSet> banks;
  std::vector<std::string> ids;
  std::optional<ExposureMatrix> initial;
  AnnealConfig anneal;
  json population_echo;
};

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + p.string());
  return out;
}

ChainOutcome run_job(const Job& job, const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  ChainOutcome out;
  out.label = job.label;
  out.n_banks = job.banks->size();
  out.direction = job.anneal.direction;
  out.trace_file = cfg.output_dir / ("trace_" + job.label + ".csv");
  out.result_file = cfg.output_dir / ("result_" + job.label + ".json");
  out.network_file = cfg.output_dir / ("network_" + job.label + ".csv");
  out.nodes_file = cfg.output_dir / ("nodes_" + job.label + ".csv");

  {
    auto nodes = open_out(out.nodes_file);
    write_nodes_csv(nodes, job.ids, *job.banks);
  }

  auto trace = open_out(out.trace_file);
  trace << kTraceHeader << '\n' << std::flush;
  auto observer = [&trace](const TraceRecord& r) {
    trace << r.n << ',' << format_double(r.psi) << ',' << format_double(r.lambda) << ','
          << format_double(r.assortativity) << ',' << format_double(r.mean_degree) << ','
          << format_double(r.acceptance_rate) << '\n'
          << std::flush;
  };
  AnnealResult res = anneal(job.banks, job.anneal, job.initial, observer);
  trace.close();

  {
    auto net = open_out(out.network_file);
    write_edges_csv(net, job.ids, res.matrix);
  }

  json assort;
  try {
    assort = to_json(scalar_assortativity(res.matrix, job.anneal.source_property,
                                          job.anneal.target_property,
                                          job.anneal.assortativity_bins));
  } catch (const Error& e) {
    assort = {{"error", e.what()}};
  }
  const double pearson_st =
      edge_pearson(res.matrix, job.anneal.source_property, job.anneal.target_property);

  json result = {
      {"schema_version", kResultSchemaVersion},
      {"label", job.label},
      {"seed", job.anneal.rng_seed},
      {"n_banks", job.banks->size()},
      {"psi_report", to_json(res.report)},
      {"network_summary", to_json(network_summary(res.matrix))},
      {"assortativity", assort},
      {"edge_pearson", std::isfinite(pearson_st) ? json(pearson_st) : json(nullptr)},
      {"symmetry_ratio", symmetry_ratio(res.matrix.alpha())},
      {"anneal",
       {{"sweeps", job.anneal.sweeps},
        {"proposals", res.proposals},
        {"null_proposals", res.null_proposals},
        {"accepted", res.accepted}}},
      {"config", {{"experiment", cfg.source}, {"chain", to_json(job.anneal)}}},
  };
  if (!job.population_echo.is_null()) result["config"]["population"] = job.population_echo;
  {
    auto rf = open_out(out.result_file);
    rf << result.dump(2) << '\n';
  }

  out.report = res.report;
  out.assortativity = res.trace.empty() ? 0.0 : res.trace.back().assortativity;
  out.mean_degree = res.trace.empty() ? 0.0 : res.trace.back().mean_degree;

  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  auto tf = open_out(cfg.output_dir / ("timing_" + job.label + ".json"));
  tf << json{{"label", job.label}, {"wall_time_seconds", seconds}}.dump(2) << '\n';
  return out;
}

json population_json(const PopulationSpec& p) {
  json j = {{"kind", to_string(p.kind)}, {"n_banks", p.n_banks}, {"seed", p.rng_seed}};
  switch (p.kind) {
    case PopulationKind::kParetoUniform:
      j["pareto_exponent"] = p.pareto_exponent;
      j["pareto_scale"] = p.pareto_scale;
      j["leverage_low"] = p.leverage_low;
      j["leverage_high"] = p.leverage_high;
      break;
    case PopulationKind::kGrid:
      j["grid_low"] = p.grid_low;
      j["grid_span"] = p.grid_span;
      j["rescale"] = p.rescale;
      break;
    case PopulationKind::kTwoType:
      j["two_type"] = to_json(p.two_type);
      break;
    case PopulationKind::kCustom:
      break;
  }
  return j;
}

std::vector<ChainOutcome> run_jobs(const std::vector<Job>& jobs, const ExperimentConfig& cfg) {
  fs::create_directories(cfg.output_dir);
  std::vector<ChainOutcome> outcomes(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  const auto n_jobs = static_cast<std::int64_t>(jobs.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t k = 0; k < n_jobs; ++k) {
    try {
      outcomes[static_cast<std::size_t>(k)] = run_job(jobs[static_cast<std::size_t>(k)], cfg);
    } catch (...) {
      errors[static_cast<std::size_t>(k)] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return outcomes;
}

}  // namespace

std::vector<ChainOutcome> run_experiment(const ExperimentConfig& cfg) {
  std::shared_ptr<const BankSet> banks;
  std::vector<std::string> ids;
  std::optional<ExposureMatrix> initial;
  json pop_echo;
  if (cfg.population) {
    banks = std::make_shared<const BankSet>(generate_population(*cfg.population));
    ids = default_ids(banks->size());
    pop_echo = population_json(*cfg.population);
  } else {
    auto loaded = load_network(cfg.network->nodes, cfg.network->edges, cfg.network->options);
    banks = loaded.banks;
    ids = std::move(loaded.ids);
    // Start from the observed network.
    initial = std::move(loaded.exposures);
  }

  std::vector<Job> jobs;
  for (const auto& c : cfg.chains) {
    jobs.push_back({c.label, banks, ids, initial, c.anneal, pop_echo});
  }
  return run_jobs(jobs, cfg);
}

std::vector<ChainOutcome> run_scaling(const ExperimentConfig& cfg) {
  if (!cfg.population || cfg.scaling_sizes.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "scaling needs a population and scaling.sizes");
  }
  std::vector<Job> jobs;
  for (std::size_t n : cfg.scaling_sizes) {
    PopulationSpec spec = *cfg.population;
    spec.n_banks = n;
    auto banks = std::make_shared<const BankSet>(generate_population(spec));
    for (const auto& c : cfg.chains) {
      jobs.push_back({c.label + "_N" + std::to_string(n), banks, default_ids(n), std::nullopt,
                      c.anneal, population_json(spec)});
    }
  }
  auto outcomes = run_jobs(jobs, cfg);
  auto summary = open_out(cfg.output_dir / ("scaling_" + cfg.label + ".csv"));
  summary << "n_banks,label,direction,psi,lambda,assortativity,mean_degree\n";
  for (const auto& o : outcomes) {
    summary << o.n_banks << ',' << o.label << ',' << to_string(o.direction) << ','
            << format_double(o.report.psi_total) << ',' << format_double(o.report.lambda) << ','
            << format_double(o.assortativity) << ',' << format_double(o.mean_degree) << '\n';
  }
  return outcomes;
}

}  // namespace sysrisk
