// sysrisk: command-line front end for shock propagation, Ψ decomposition and
// exposure-matrix annealing.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "sysrisk/amplification.hpp"
#include "sysrisk/analytic.hpp"
#include "sysrisk/error.hpp"
#include "sysrisk/experiment.hpp"
#include "sysrisk/generators.hpp"
#include "sysrisk/metrics.hpp"
#include "sysrisk/network_io.hpp"
#include "sysrisk/optimizer.hpp"
#include "sysrisk/propagation.hpp"
#include "sysrisk/report_json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sysrisk;

namespace {

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::optional<int> terms_trial;
  std::optional<int> terms_final;
  std::optional<std::string> out_dir;

  std::uint64_t seed_or(std::uint64_t d) const { return seed.value_or(d); }
  int final_terms_or(int d) const { return terms_final.value_or(d); }
};

struct NetworkArgs {
  std::string nodes, edges;
  bool largest_scc = false;
  bool net_reciprocal = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--nodes", nodes, "Nodes CSV (id,[equity,]assets,liabilities)")->required();
    cmd->add_option("--edges", edges, "Edges CSV (source,target,exposure)")->required();
    cmd->add_flag("--largest-scc", largest_scc, "Restrict to the largest strongly connected component");
    cmd->add_flag("--net-reciprocal", net_reciprocal, "Net reciprocal edge pairs into one edge");
  }

  LoadedNetwork load(const GlobalOptions& g, std::uint64_t seed_offset = 0) const {
    LoadOptions opts;
    opts.largest_scc = largest_scc;
    opts.net_reciprocal = net_reciprocal;
    opts.equity_seed = g.seed_or(1) + seed_offset;
    return load_network(nodes, edges, opts);
  }
};

// Writes to <out-dir>/<name> when --out-dir is set, stdout otherwise.
void emit(const GlobalOptions& g, const std::string& name, const std::string& text) {
  if (!g.out_dir) {
    std::cout << text;
    return;
  }
  fs::create_directories(*g.out_dir);
  const fs::path p = fs::path(*g.out_dir) / name;
  std::ofstream out(p);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + p.string());
  out << text;
}

json null_if_nan(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// ---- generate --------------------------------------------------------------

struct GenerateArgs {
  std::string kind = "pareto_uniform";
  std::size_t n = 30;
  double pareto_exponent = 3.0;
  double leverage_low = 0.32, leverage_high = 0.96;
  double rescale = 1.0;
  std::size_t n1 = 5, n2 = 50;
  double c1 = 2.0, c2 = 0.5, kappa = 0.0;
  std::string prefix = "population";
};

void run_generate(const GenerateArgs& a, const GlobalOptions& g) {
  PopulationSpec spec;
  spec.kind = parse_population_kind(a.kind);
  spec.n_banks = a.n;
  spec.rng_seed = g.seed_or(1);
  spec.pareto_exponent = a.pareto_exponent;
  spec.leverage_low = a.leverage_low;
  spec.leverage_high = a.leverage_high;
  spec.rescale = a.rescale;
  spec.two_type = {a.n1, a.n2, a.c1, a.c2, a.kappa, 1.0};
  if (spec.kind == PopulationKind::kCustom)
    throw Error(ErrorCode::kInvalidSpec, "custom populations are read from files, not generated");

  auto banks = std::make_shared<const BankSet>(generate_population(spec));
  const ExposureMatrix m = spec.kind == PopulationKind::kTwoType
                               ? two_type_exposures(spec.two_type, banks)
                               : initial_feasible_matrix(banks);
  const auto ids = default_ids(banks->size());
  const fs::path dir = g.out_dir.value_or(".");
  fs::create_directories(dir);
  const fs::path nodes = dir / (a.prefix + "_nodes.csv");
  const fs::path edges = dir / (a.prefix + "_edges.csv");
  {
    std::ofstream out(nodes);
    write_nodes_csv(out, ids, *banks);
  }
  {
    std::ofstream out(edges);
    write_edges_csv(out, ids, m);
  }
  std::cout << json{{"nodes", nodes.string()}, {"edges", edges.string()},
                    {"n_banks", banks->size()}, {"kind", a.kind}}
                   .dump(2)
            << '\n';
}

// ---- propagate -------------------------------------------------------------

struct PropagateArgs {
  NetworkArgs net;
  double shock = 0.01;
  std::string shock_file;
  int t_max = 50;
  std::uint64_t samples = 0;
};

std::vector<double> read_shock_file(const std::string& path, const std::vector<std::string>& ids) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  std::vector<double> h(ids.size(), 0.0);
  std::string line;
  std::size_t lineno = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (header) {
      if (line.rfind("id,h1", 0) != 0) throw ParseError(ErrorCode::kParseError, path, lineno, "header must be id,h1");
      header = false;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError(ErrorCode::kParseError, path, lineno, "expected id,h1");
    const std::string id = line.substr(0, comma);
    const auto it = std::find(ids.begin(), ids.end(), id);
    if (it == ids.end()) throw ParseError(ErrorCode::kUnknownNodeId, path, lineno, "unknown node id '" + id + "'");
    try {
      h[static_cast<std::size_t>(it - ids.begin())] = std::stod(line.substr(comma + 1));
    } catch (const std::exception&) {
      throw ParseError(ErrorCode::kParseError, path, lineno, "invalid shock value");
    }
  }
  return h;
}

void run_propagate(const PropagateArgs& a, const GlobalOptions& g) {
  const auto net = a.net.load(g);
  const LambdaMatrix lm = lambda_from_exposures(net.exposures);
  const std::size_t n = lm.size();

  if (a.samples > 0) {
    const auto ranges = sample_no_bankruptcy_shocks(lm, a.samples, g.seed_or(1));
    json out = to_json(ranges);
    out["ids"] = net.ids;
    emit(g, "shock_ranges.json", out.dump(2) + "\n");
    return;
  }

  const bool uniform = a.shock_file.empty();
  const std::vector<double> h1 =
      uniform ? std::vector<double>(n, a.shock) : read_shock_file(a.shock_file, net.ids);
  const auto result = propagate(lm, h1, a.t_max);

  std::ostringstream csv;
  csv << "t,H";
  if (uniform) csv << ",H_over_psi";
  for (const auto& id : net.ids) csv << ",h_" << id;
  csv << '\n';
  for (const auto& s : result.states) {
    csv << s.t << ',' << format_double(s.aggregate);
    if (uniform) csv << ',' << format_double(s.aggregate / a.shock);
    for (double v : s.h) csv << ',' << format_double(v);
    csv << '\n';
  }

  json summary = {{"t_max", a.t_max},
                  {"steps_recorded", result.states.size()},
                  {"overflowed", result.overflowed},
                  {"lambda", spectral_radius(lm)}};
  json bankrupt = json::array();
  for (std::size_t i = 0; i < n; ++i)
    if (result.bankrupt[i]) bankrupt.push_back(net.ids[i]);
  summary["bankrupt"] = bankrupt;
  try {
    const auto h_inf = h_infinity_exact(lm, h1);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += h_inf[i] * lm.equity_share()[i];
    csv << "inf," << format_double(total);
    if (uniform) csv << ',' << format_double(total / a.shock);
    for (double v : h_inf) csv << ',' << format_double(v);
    csv << '\n';
    summary["H_infinity"] = total;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kSupercriticalSystem) throw;
    summary["H_infinity"] = nullptr;
  }
  emit(g, "propagation.csv", csv.str());
  if (g.out_dir) emit(g, "propagation_summary.json", summary.dump(2) + "\n");
}

// ---- psi -------------------------------------------------------------------

struct PsiArgs {
  NetworkArgs net;
  int equity_samples = 0;
};

void run_psi(const PsiArgs& a, const GlobalOptions& g) {
  const int terms = g.final_terms_or(terms::kIllustrativeFinal);
  const auto net = a.net.load(g);
  const PsiReport report = psi_full(net.exposures, terms);
  const LocalTerms local = psi_local_terms(net.exposures.banks());

  json out = {{"schema_version", kResultSchemaVersion},
              {"n_banks", net.exposures.size()},
              {"psi_report", to_json(report)},
              {"local_terms", {{"psi_1", local.psi_1}, {"psi_2", local.psi_2}}},
              {"psi_3_risk_matrix", psi_3_from_risk_matrix(net.exposures)},
              {"mean_leverage_approximation",
               mean_leverage_psi(net.exposures.banks()) ? json(*mean_leverage_psi(net.exposures.banks()))
                                                        : json(nullptr)},
              {"equity_reconstructed", net.equity_reconstructed},
              {"dropped_nodes", net.dropped_nodes},
              {"netted_pairs", net.netted_pairs}};

  if (a.equity_samples > 0) {
    if (!net.equity_reconstructed)
      throw Error(ErrorCode::kInvalidArgument, "--equity-samples needs a nodes file without equity");
    std::vector<double> psi(static_cast<std::size_t>(a.equity_samples));
    std::vector<std::exception_ptr> errors(psi.size());
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < a.equity_samples; ++k) {
      try {
        const auto sample = a.net.load(g, static_cast<std::uint64_t>(k));
        psi[static_cast<std::size_t>(k)] = psi_full(sample.exposures, terms).psi_total;
      } catch (...) {
        errors[static_cast<std::size_t>(k)] = std::current_exception();
      }
    }
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);
    double mean = 0.0;
    for (double v : psi) mean += v;
    mean /= static_cast<double>(psi.size());
    double var = 0.0;
    for (double v : psi) var += (v - mean) * (v - mean);
    const double sd = psi.size() > 1 ? std::sqrt(var / static_cast<double>(psi.size() - 1)) : 0.0;
    out["equity_samples"] = {{"count", a.equity_samples}, {"mean", mean}, {"std", sd}, {"psi", psi}};
  }
  emit(g, "psi.json", out.dump(2) + "\n");
}

// ---- optimize / scaling ----------------------------------------------------

ExperimentConfig load_config_with_overrides(const std::string& path, const GlobalOptions& g) {
  ExperimentConfig cfg = load_experiment_config(path);
  Overrides o;
  o.seed = g.seed;
  o.trial_terms = g.terms_trial;
  o.final_terms = g.terms_final;
  if (g.out_dir) o.output_dir = *g.out_dir;
  apply_overrides(cfg, o);
  return cfg;
}

json outcome_json(const ChainOutcome& o) {
  return {{"label", o.label},
          {"n_banks", o.n_banks},
          {"direction", to_string(o.direction)},
          {"psi", o.report.psi_total},
          {"lambda", o.report.lambda},
          {"assortativity", null_if_nan(o.assortativity)},
          {"mean_degree", o.mean_degree},
          {"trace", o.trace_file.string()},
          {"result", o.result_file.string()},
          {"network", o.network_file.string()},
          {"nodes", o.nodes_file.string()}};
}

void run_optimize(const std::string& config, const GlobalOptions& g) {
  const auto cfg = load_config_with_overrides(config, g);
  json out = json::array();
  for (const auto& o : run_experiment(cfg)) out.push_back(outcome_json(o));
  std::cout << out.dump(2) << '\n';
}

void run_scaling_cmd(const std::string& config, const GlobalOptions& g) {
  const auto cfg = load_config_with_overrides(config, g);
  if (cfg.scaling_sizes.empty())
    throw Error(ErrorCode::kParseError, "config has no 'scaling' section");
  json out = json::array();
  for (const auto& o : run_scaling(cfg)) out.push_back(outcome_json(o));
  std::cout << out.dump(2) << '\n';
}

// ---- metrics ---------------------------------------------------------------

struct MetricsArgs {
  NetworkArgs net;
  int bins = kDefaultAssortativityBins;
  std::string source = "liability_ratio";
  std::string target = "leverage";
};

void run_metrics(const MetricsArgs& a, const GlobalOptions& g) {
  const auto net = a.net.load(g);
  const NodeProperty src = parse_node_property(a.source);
  const NodeProperty tgt = parse_node_property(a.target);
  json out = {{"schema_version", kResultSchemaVersion},
              {"network_summary", to_json(network_summary(net.exposures))},
              {"symmetry_ratio", symmetry_ratio(net.exposures.alpha())},
              {"edge_pearson", null_if_nan(edge_pearson(net.exposures, src, tgt))}};
  try {
    out["assortativity"] = to_json(scalar_assortativity(net.exposures, src, tgt, a.bins));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kInvalidArgument) throw;
    out["assortativity"] = {{"error", e.what()}};
  }
  emit(g, "metrics.json", out.dump(2) + "\n");
}

// ---- analytic --------------------------------------------------------------

struct AnalyticArgs {
  std::string model = "two_type";
  std::size_t n1 = 5, n2 = 50;
  double c1 = 2.0, c2 = 0.5, kappa = 0.0;
  int kappa_grid = 0;
  double leverage = 0.5;
};

void run_analytic(const AnalyticArgs& a, const GlobalOptions& g) {
  const int terms = g.final_terms_or(terms::kIllustrativeFinal);
  json out;
  if (a.model == "constant_leverage") {
    const auto r = constant_leverage_psi(a.leverage, terms);
    out = {{"model", a.model},
           {"leverage", a.leverage},
           {"terms", terms},
           {"psi_truncated", r.truncated},
           {"psi_closed_form", r.closed_form ? json(*r.closed_form) : json(nullptr)}};
  } else if (a.model == "two_type") {
    TwoTypeModel m{a.n1, a.n2, a.c1, a.c2, a.kappa, 1.0};
    auto entry = [&](const TwoTypeModel& mm) {
      LambdaMatrix lm = two_type_lambda_matrix(mm);
      const auto pi = power_iteration(lm.values());
      return json{{"kappa", mm.kappa},
                  {"lambda_closed_form", two_type_spectral_radius(mm)},
                  {"lambda_power_iteration", pi.value},
                  {"power_iteration_converged", pi.converged},
                  {"psi", two_type_psi(mm, terms)}};
    };
    m.validate();
    out = {{"model", a.model}, {"parameters", to_json(m)}, {"kappa_max", m.kappa_max()},
           {"terms", terms}};
    out["result"] = entry(m);
    if (m.c1 < 1.0) out["psi_assortative_limit"] = two_type_psi_assortative_limit(m);
    if (a.kappa_grid > 1) {
      json grid = json::array();
      for (int k = 0; k < a.kappa_grid; ++k) {
        TwoTypeModel mk = m;
        mk.kappa = m.kappa_max() * k / (a.kappa_grid - 1);
        grid.push_back(entry(mk));
      }
      out["kappa_grid"] = grid;
    }
  } else {
    throw Error(ErrorCode::kInvalidArgument, "unknown model '" + a.model + "'");
  }
  emit(g, "analytic.json", out.dump(2) + "\n");
}

void report_error(const std::string& code, const std::string& message,
                  std::optional<std::size_t> line = std::nullopt) {
  json err = {{"code", code}, {"message", message}};
  if (line) err["line"] = *line;
  std::cerr << json{{"error", err}}.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sysrisk: shock propagation, shock multiplier and exposure-network annealing"};
  app.require_subcommand(1);

  GlobalOptions g;
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--terms-trial", g.terms_trial, "Series terms for trial evaluation");
  app.add_option("--terms-final", g.terms_final, "Series terms for final evaluation");
  app.add_option("--out-dir", g.out_dir, "Output directory");

  GenerateArgs gen;
  auto* c_gen = app.add_subcommand("generate", "Generate a bank population and a feasible network");
  c_gen->add_option("--kind", gen.kind, "pareto_uniform | grid | two_type");
  c_gen->add_option("--n", gen.n, "Number of banks");
  c_gen->add_option("--pareto-exponent", gen.pareto_exponent);
  c_gen->add_option("--leverage-low", gen.leverage_low);
  c_gen->add_option("--leverage-high", gen.leverage_high);
  c_gen->add_option("--rescale", gen.rescale, "Grid leverage rescale factor c");
  c_gen->add_option("--n1", gen.n1);
  c_gen->add_option("--n2", gen.n2);
  c_gen->add_option("--c1", gen.c1);
  c_gen->add_option("--c2", gen.c2);
  c_gen->add_option("--kappa", gen.kappa);
  c_gen->add_option("--prefix", gen.prefix, "Output file prefix");

  PropagateArgs prop;
  auto* c_prop = app.add_subcommand("propagate", "Propagate a shock; h(t), H(t) and h_infinity table");
  prop.net.add_to(c_prop);
  c_prop->add_option("--shock", prop.shock, "Uniform initial shock psi");
  c_prop->add_option("--shock-file", prop.shock_file, "Per-bank initial shock CSV (id,h1)");
  c_prop->add_option("--t-max", prop.t_max, "Number of time steps");
  c_prop->add_option("--no-bankruptcy-samples", prop.samples,
                     "Sample h_infinity in [0,1) and report ranges of h(1) instead");

  PsiArgs psi;
  auto* c_psi = app.add_subcommand("psi", "Shock multiplier report");
  psi.net.add_to(c_psi);
  c_psi->add_option("--equity-samples", psi.equity_samples,
                    "Repeat with this many reconstructed-equity samples");

  std::string opt_config;
  auto* c_opt = app.add_subcommand("optimize", "Anneal exposure matrices from an experiment config");
  c_opt->add_option("--config", opt_config, "Experiment config (JSON)")->required();

  MetricsArgs met;
  auto* c_met = app.add_subcommand("metrics", "Network summary and assortativity");
  met.net.add_to(c_met);
  c_met->add_option("--bins", met.bins, "Assortativity bins");
  c_met->add_option("--source-property", met.source);
  c_met->add_option("--target-property", met.target);

  AnalyticArgs ana;
  auto* c_ana = app.add_subcommand("analytic", "Closed-form models");
  c_ana->add_option("--model", ana.model, "two_type | constant_leverage");
  c_ana->add_option("--n1", ana.n1);
  c_ana->add_option("--n2", ana.n2);
  c_ana->add_option("--c1", ana.c1);
  c_ana->add_option("--c2", ana.c2);
  c_ana->add_option("--kappa", ana.kappa);
  c_ana->add_option("--kappa-grid", ana.kappa_grid, "Also evaluate this many kappa values in [0, kappa_max]");
  c_ana->add_option("--leverage", ana.leverage, "Constant leverage C");

  std::string scaling_config;
  auto* c_scl = app.add_subcommand("scaling", "Multi-N annealing batch");
  c_scl->add_option("--config", scaling_config, "Experiment config with a 'scaling' section")->required();

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("UsageError", e.what());
    return 1;
  }

  try {
    if (*c_gen) run_generate(gen, g);
    else if (*c_prop) run_propagate(prop, g);
    else if (*c_psi) run_psi(psi, g);
    else if (*c_opt) run_optimize(opt_config, g);
    else if (*c_met) run_metrics(met, g);
    else if (*c_ana) run_analytic(ana, g);
    else if (*c_scl) run_scaling_cmd(scaling_config, g);
  } catch (const ParseError& e) {
    report_error(std::string(to_string(e.code())), e.what(), e.line());
    return 2;
  } catch (const Error& e) {
    report_error(std::string(to_string(e.code())), e.what());
    return 2;
  } catch (const std::exception& e) {
    report_error("InternalError", e.what());
    return 3;
  }
  return 0;
}
