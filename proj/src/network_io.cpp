#include "sysrisk/network_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <unordered_map>

#include "sysrisk/error.hpp"
#include "sysrisk/generators.hpp"

namespace sysrisk {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

class CsvReader {
 public:
  CsvReader(std::istream& in, std::string name) : in_(in), name_(std::move(name)) {}

  // Next non-blank record; false at end of input.
  bool next(std::vector<std::string>& fields) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_;
      if (trim(line).empty()) continue;
      fields = split_csv(line);
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(ErrorCode code, const std::string& message) const {
    throw ParseError(code, name_, line_, message);
  }

  double number(const std::string& field, const char* what) const {
    double v = 0.0;
    const auto* first = field.data();
    const auto* last = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (field.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
      fail(ErrorCode::kParseError, std::string("invalid ") + what + " '" + field + "'");
    }
    return v;
  }

  std::size_t line() const { return line_; }

 private:
  std::istream& in_;
  std::string name_;
  std::size_t line_ = 0;
};

struct NodeRecord {
  std::string id;
  std::optional<double> equity;
  double assets = 0.0, liabilities = 0.0;
};

struct EdgeRecord {
  std::size_t source, target;
  double exposure;
};

std::vector<NodeRecord> read_nodes(std::istream& in, const std::string& name, bool& has_equity) {
  CsvReader csv(in, name);
  std::vector<std::string> header;
  if (!csv.next(header)) csv.fail(ErrorCode::kParseError, "missing header");
  std::map<std::string, std::size_t> col;
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (!col.emplace(header[k], k).second) csv.fail(ErrorCode::kParseError, "duplicate column " + header[k]);
  }
  for (const auto& h : header) {
    if (h != "id" && h != "equity" && h != "assets" && h != "liabilities")
      csv.fail(ErrorCode::kParseError, "unknown column '" + h + "'");
  }
  for (const char* required : {"id", "assets", "liabilities"})
    if (!col.count(required)) csv.fail(ErrorCode::kParseError, std::string("missing column ") + required);
  has_equity = col.count("equity") > 0;

  std::vector<NodeRecord> nodes;
  std::unordered_map<std::string, std::size_t> seen;
  std::vector<std::string> f;
  while (csv.next(f)) {
    if (f.size() != header.size()) csv.fail(ErrorCode::kParseError, "wrong number of fields");
    NodeRecord r;
    r.id = f[col["id"]];
    if (r.id.empty()) csv.fail(ErrorCode::kParseError, "empty id");
    if (!seen.emplace(r.id, nodes.size()).second) csv.fail(ErrorCode::kParseError, "duplicate id " + r.id);
    if (has_equity) r.equity = csv.number(f[col["equity"]], "equity");
    r.assets = csv.number(f[col["assets"]], "assets");
    r.liabilities = csv.number(f[col["liabilities"]], "liabilities");
    if (r.assets < 0.0 || r.liabilities < 0.0)
      csv.fail(ErrorCode::kParseError, "negative assets or liabilities");
    nodes.push_back(std::move(r));
  }
  return nodes;
}

std::vector<EdgeRecord> read_edges(std::istream& in, const std::string& name,
                                   const std::unordered_map<std::string, std::size_t>& index) {
  CsvReader csv(in, name);
  std::vector<std::string> header;
  if (!csv.next(header)) csv.fail(ErrorCode::kParseError, "missing header");
  if (header != std::vector<std::string>{"source", "target", "exposure"})
    csv.fail(ErrorCode::kParseError, "edges header must be source,target,exposure");

  std::vector<EdgeRecord> edges;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> seen;
  std::vector<std::string> f;
  while (csv.next(f)) {
    if (f.size() != 3) csv.fail(ErrorCode::kParseError, "wrong number of fields");
    const auto s = index.find(f[0]);
    if (s == index.end()) csv.fail(ErrorCode::kUnknownNodeId, "unknown node id '" + f[0] + "'");
    const auto t = index.find(f[1]);
    if (t == index.end()) csv.fail(ErrorCode::kUnknownNodeId, "unknown node id '" + f[1] + "'");
    if (s->second == t->second) csv.fail(ErrorCode::kSelfLoopEdge, "self-loop on '" + f[0] + "'");
    const double w = csv.number(f[2], "exposure");
    if (w < 0.0) csv.fail(ErrorCode::kNegativeExposure, "negative exposure");
    if (!seen.emplace(std::make_pair(s->second, t->second), csv.line()).second)
      csv.fail(ErrorCode::kDuplicateEdge, "duplicate edge " + f[0] + "->" + f[1]);
    edges.push_back({s->second, t->second, w});
  }
  return edges;
}

}  // namespace

std::vector<std::vector<std::size_t>> strongly_connected_components(
    const std::vector<std::vector<std::size_t>>& adjacency) {
  // Iterative Tarjan.
  const std::size_t n = adjacency.size();
  constexpr std::size_t kUnvisited = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index(n, kUnvisited), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::pair<std::size_t, std::size_t>> call;  // (node, next child position)
  std::vector<std::vector<std::size_t>> components;
  std::size_t counter = 0;

  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != kUnvisited) continue;
    call.emplace_back(root, 0);
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      auto& [v, pos] = call.back();
      if (pos < adjacency[v].size()) {
        const std::size_t w = adjacency[v][pos++];
        if (index[w] == kUnvisited) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          call.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      const std::size_t done = v;
      call.pop_back();
      if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
      if (low[done] == index[done]) {
        std::vector<std::size_t> comp;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp.push_back(w);
        } while (w != done);
        std::sort(comp.begin(), comp.end());
        components.push_back(std::move(comp));
      }
    }
  }
  std::sort(components.begin(), components.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return components;
}

LoadedNetwork load_network(std::istream& nodes_in, const std::string& nodes_name,
                           std::istream& edges_in, const std::string& edges_name,
                           const LoadOptions& options) {
  bool has_equity = false;
  const auto nodes = read_nodes(nodes_in, nodes_name, has_equity);
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < nodes.size(); ++i) index.emplace(nodes[i].id, i);
  auto edges = read_edges(edges_in, edges_name, index);
  const std::size_t n_all = nodes.size();

  std::size_t netted_pairs = 0;

  if (options.net_reciprocal) {
    std::map<std::pair<std::size_t, std::size_t>, double> w;
    for (const auto& e : edges) w[{e.source, e.target}] = e.exposure;
    std::vector<EdgeRecord> netted;
    for (const auto& [key, value] : w) {
      const auto [s, t] = key;
      const auto rev = w.find({t, s});
      if (rev == w.end()) {
        netted.push_back({s, t, value});
        continue;
      }
      if (s > t) continue;  // handled with the (t, s) entry
      ++netted_pairs;
      const double diff = value - rev->second;
      if (diff > 0.0) netted.push_back({s, t, diff});
      else if (diff < 0.0) netted.push_back({t, s, -diff});
    }
    edges = std::move(netted);
  }

  std::vector<std::size_t> keep(n_all);
  for (std::size_t i = 0; i < n_all; ++i) keep[i] = i;
  if (options.largest_scc) {
    std::vector<std::vector<std::size_t>> adj(n_all);
    for (const auto& e : edges)
      if (e.exposure > 0.0) adj[e.source].push_back(e.target);
    for (auto& a : adj) std::sort(a.begin(), a.end());
    const auto comps = strongly_connected_components(adj);
    const auto best = std::max_element(comps.begin(), comps.end(), [](const auto& a, const auto& b) {
      return a.size() < b.size();  // first of equal-size components wins
    });
    keep = *best;
  }

  constexpr std::size_t kDropped = static_cast<std::size_t>(-1);
  std::vector<std::size_t> dense(n_all, kDropped);
  for (std::size_t k = 0; k < keep.size(); ++k) dense[keep[k]] = k;
  const std::size_t n = keep.size();

  DenseMatrix exposure(n);
  for (const auto& e : edges) {
    const std::size_t s = dense[e.source], t = dense[e.target];
    if (s == kDropped || t == kDropped) continue;
    exposure(s, t) = e.exposure;
  }
  std::vector<double> assets = exposure.row_sums();
  std::vector<double> liabilities = exposure.column_sums();

  if (!options.largest_scc && !options.net_reciprocal) {
    double scale = 0.0;
    for (std::size_t k = 0; k < n; ++k) scale = std::max({scale, assets[k], liabilities[k]});
    const double tol = kMarginTolerance * std::max(scale, 1e-300);
    for (std::size_t k = 0; k < n; ++k) {
      const auto& r = nodes[keep[k]];
      if (std::abs(r.assets - assets[k]) > tol || std::abs(r.liabilities - liabilities[k]) > tol) {
        throw Error(ErrorCode::kMarginMismatch,
                    nodes_name + ": assets/liabilities of node '" + r.id +
                        "' disagree with the edge list");
      }
    }
  }

  std::vector<double> equity(n);
  if (has_equity) {
    for (std::size_t k = 0; k < n; ++k) equity[k] = *nodes[keep[k]].equity;
  } else {
    equity = reconstruct_equity(assets, liabilities, options.equity_seed, options.equity_noise_sd);
  }

  auto banks = std::make_shared<const BankSet>(BankSet::build(equity, assets, liabilities));
  const double total = banks->total_equity();
  DenseMatrix alpha(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) alpha(i, j) = exposure(i, j) / total;

  std::vector<std::string> ids;
  ids.reserve(n);
  for (std::size_t k : keep) ids.push_back(nodes[k].id);
  return LoadedNetwork{std::move(ids), banks, ExposureMatrix::checked(banks, std::move(alpha)),
                       !has_equity, n_all - n, netted_pairs};
}

LoadedNetwork load_network(const std::filesystem::path& nodes_path,
                           const std::filesystem::path& edges_path, const LoadOptions& options) {
  std::ifstream nodes(nodes_path);
  if (!nodes) throw Error(ErrorCode::kIoError, "cannot open " + nodes_path.string());
  std::ifstream edges(edges_path);
  if (!edges) throw Error(ErrorCode::kIoError, "cannot open " + edges_path.string());
  return load_network(nodes, nodes_path.string(), edges, edges_path.string(), options);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_nodes_csv(std::ostream& out, const std::vector<std::string>& ids, const BankSet& bs) {
  out << "id,equity,assets,liabilities\n";
  for (std::size_t i = 0; i < bs.size(); ++i) {
    out << ids[i] << ',' << format_double(bs.equity()[i]) << ','
        << format_double(bs.assets()[i]) << ',' << format_double(bs.liabilities()[i]) << '\n';
  }
}

void write_edges_csv(std::ostream& out, const std::vector<std::string>& ids,
                     const ExposureMatrix& m) {
  const double total = m.banks().total_equity();
  out << "source,target,exposure\n";
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m.size(); ++j)
      if (m(i, j) > 0.0) out << ids[i] << ',' << ids[j] << ',' << format_double(m(i, j) * total) << '\n';
}

std::vector<std::string> default_ids(std::size_t n) {
  std::vector<std::string> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = std::to_string(i);
  return ids;
}

}  // namespace sysrisk
