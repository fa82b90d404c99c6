#include "sysrisk/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sysrisk/error.hpp"

namespace sysrisk {

std::string to_string(NodeProperty p) {
  switch (p) {
    case NodeProperty::kLeverage: return "leverage";
    case NodeProperty::kLiabilityRatio: return "liability_ratio";
    case NodeProperty::kEquity: return "equity";
    case NodeProperty::kAssets: return "assets";
    case NodeProperty::kLiabilities: return "liabilities";
  }
  return "unknown";
}

NodeProperty parse_node_property(const std::string& name) {
  for (auto p : {NodeProperty::kLeverage, NodeProperty::kLiabilityRatio, NodeProperty::kEquity,
                 NodeProperty::kAssets, NodeProperty::kLiabilities}) {
    if (to_string(p) == name) return p;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown node property '" + name + "'");
}

std::vector<double> node_property_values(const BankSet& bs, NodeProperty p) {
  std::vector<double> v(bs.size());
  for (std::size_t i = 0; i < bs.size(); ++i) {
    switch (p) {
      case NodeProperty::kLeverage: v[i] = bs.leverage(i); break;
      case NodeProperty::kLiabilityRatio: v[i] = bs.liability_ratio(i); break;
      case NodeProperty::kEquity: v[i] = bs.equity()[i]; break;
      case NodeProperty::kAssets: v[i] = bs.assets()[i]; break;
      case NodeProperty::kLiabilities: v[i] = bs.liabilities()[i]; break;
    }
  }
  return v;
}

std::vector<std::pair<std::size_t, std::size_t>> support_edges(const DenseMatrix& alpha) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < alpha.size(); ++i)
    for (std::size_t j = 0; j < alpha.size(); ++j)
      if (alpha(i, j) > 0.0) edges.emplace_back(i, j);
  return edges;
}

namespace {

struct Binning {
  std::vector<int> bin;       // per node
  std::vector<double> label;  // per bin midpoint
};

Binning bin_values(std::span<const double> values, int n_bins) {
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it, hi = *hi_it;
  const double width = (hi - lo) / n_bins;
  Binning b;
  b.label.resize(static_cast<std::size_t>(n_bins));
  for (int k = 0; k < n_bins; ++k) b.label[k] = lo + (k + 0.5) * width;
  b.bin.resize(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    int k = width > 0.0 ? static_cast<int>((values[i] - lo) / width) : 0;
    b.bin[i] = std::clamp(k, 0, n_bins - 1);
  }
  return b;
}

// Mixing counts e_xy (unnormalised) with the marginal counts.
struct Mixing {
  int n_bins;
  std::vector<double> counts;  // n_bins × n_bins
  std::vector<double> row, col;
  double total = 0.0;

  explicit Mixing(int k)
      : n_bins(k), counts(static_cast<std::size_t>(k * k), 0.0), row(k, 0.0), col(k, 0.0) {}

  void add(int x, int y, double w) {
    counts[static_cast<std::size_t>(x * n_bins + y)] += w;
    row[x] += w;
    col[y] += w;
    total += w;
  }
};

// r = Σ_xy x y (e_xy − a_x b_y) / (σ_a σ_b)
double coefficient(const Mixing& m, std::span<const double> xl, std::span<const double> yl) {
  if (m.total <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  const double inv = 1.0 / m.total;
  double mean_a = 0.0, mean_b = 0.0, sq_a = 0.0, sq_b = 0.0;
  for (int k = 0; k < m.n_bins; ++k) {
    const double ax = m.row[k] * inv, by = m.col[k] * inv;
    mean_a += xl[k] * ax;
    sq_a += xl[k] * xl[k] * ax;
    mean_b += yl[k] * by;
    sq_b += yl[k] * yl[k] * by;
  }
  const double var_a = sq_a - mean_a * mean_a;
  const double var_b = sq_b - mean_b * mean_b;
  // Variances below rounding noise of the second moments mean a single class.
  if (var_a <= 1e-14 * std::max(sq_a, 1e-300) || var_b <= 1e-14 * std::max(sq_b, 1e-300)) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  double num = 0.0;
  for (int x = 0; x < m.n_bins; ++x) {
    for (int y = 0; y < m.n_bins; ++y) {
      const double exy = m.counts[static_cast<std::size_t>(x * m.n_bins + y)] * inv;
      num += xl[x] * yl[y] * (exy - m.row[x] * inv * m.col[y] * inv);
    }
  }
  return num / std::sqrt(var_a * var_b);
}

void check_inputs(const DenseMatrix& alpha, std::span<const double> s, std::span<const double> t,
                  int n_bins) {
  if (s.size() != alpha.size() || t.size() != alpha.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "property vector length != network size");
  }
  if (n_bins < 2) throw Error(ErrorCode::kInvalidArgument, "assortativity needs at least 2 bins");
}

}  // namespace

double assortativity_coefficient(const DenseMatrix& alpha, std::span<const double> source_values,
                                 std::span<const double> target_values, int n_bins) {
  check_inputs(alpha, source_values, target_values, n_bins);
  const Binning sb = bin_values(source_values, n_bins);
  const Binning tb = bin_values(target_values, n_bins);
  Mixing mix(n_bins);
  for (std::size_t i = 0; i < alpha.size(); ++i)
    for (std::size_t j = 0; j < alpha.size(); ++j)
      if (alpha(i, j) > 0.0) mix.add(sb.bin[i], tb.bin[j], 1.0);
  if (mix.total < 2.0) return std::numeric_limits<double>::quiet_NaN();
  return coefficient(mix, sb.label, tb.label);
}

AssortativityResult scalar_assortativity(const DenseMatrix& alpha,
                                         std::span<const double> source_values,
                                         std::span<const double> target_values, int n_bins,
                                         bool with_variance) {
  check_inputs(alpha, source_values, target_values, n_bins);
  const auto edges = support_edges(alpha);
  if (edges.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "assortativity needs at least 2 edges");
  }
  const Binning sb = bin_values(source_values, n_bins);
  const Binning tb = bin_values(target_values, n_bins);
  Mixing mix(n_bins);
  for (auto [i, j] : edges) mix.add(sb.bin[i], tb.bin[j], 1.0);

  AssortativityResult res;
  res.n_bins = n_bins;
  res.edges = edges.size();
  res.r = coefficient(mix, sb.label, tb.label);
  res.degenerate = std::isnan(res.r);
  if (res.degenerate) {
    res.variance = std::numeric_limits<double>::quiet_NaN();
    return res;
  }
  if (with_variance) {
    double var = 0.0;
    for (auto [i, j] : edges) {
      mix.add(sb.bin[i], tb.bin[j], -1.0);
      const double rk = coefficient(mix, sb.label, tb.label);
      mix.add(sb.bin[i], tb.bin[j], 1.0);
      // Removing one edge can collapse a class; such replicas carry no information.
      if (!std::isnan(rk)) var += (rk - res.r) * (rk - res.r);
    }
    res.variance = var;
  }
  return res;
}

AssortativityResult scalar_assortativity(const ExposureMatrix& m, NodeProperty source,
                                         NodeProperty target, int n_bins, bool with_variance) {
  const auto s = node_property_values(m.banks(), source);
  const auto t = node_property_values(m.banks(), target);
  auto res = scalar_assortativity(m.alpha(), s, t, n_bins, with_variance);
  res.source_property = source;
  res.target_property = target;
  return res;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size()) throw Error(ErrorCode::kDimensionMismatch, "pearson: length mismatch");
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
    syy += (y[k] - my) * (y[k] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

double edge_pearson(const ExposureMatrix& m, NodeProperty source, NodeProperty target) {
  const auto s = node_property_values(m.banks(), source);
  const auto t = node_property_values(m.banks(), target);
  std::vector<double> xs, ys;
  for (auto [i, j] : support_edges(m.alpha())) {
    xs.push_back(s[i]);
    ys.push_back(t[j]);
  }
  return pearson(xs, ys);
}

double mean_degree(const DenseMatrix& alpha) {
  std::size_t edges = 0;
  for (double v : alpha.data())
    if (v > 0.0) ++edges;
  return alpha.size() ? static_cast<double>(edges) / static_cast<double>(alpha.size()) : 0.0;
}

double symmetry_ratio(const DenseMatrix& alpha) {
  double cross = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    for (std::size_t j = 0; j < alpha.size(); ++j) {
      cross += alpha(i, j) * alpha(j, i);
      sq += alpha(i, j) * alpha(i, j);
    }
  }
  return sq > 0.0 ? cross / sq : 0.0;
}

NetworkSummary network_summary(const ExposureMatrix& m) {
  const BankSet& bs = m.banks();
  const std::size_t n = m.size();
  NetworkSummary s;
  s.n_banks = n;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (m(i, j) > 0.0) ++s.edges;
      if (i < j && m(i, j) > 0.0 && m(j, i) > 0.0) ++s.reciprocal_pairs;
    }
  }
  s.mean_degree = static_cast<double>(s.edges) / static_cast<double>(n);
  s.assets_liabilities_pearson = pearson(bs.assets(), bs.liabilities());
  for (std::size_t i = 0; i < n; ++i) {
    s.total_assets += bs.assets()[i];
    s.total_liabilities += bs.liabilities()[i];
    s.max_assets = std::max(s.max_assets, bs.assets()[i]);
    s.max_liabilities = std::max(s.max_liabilities, bs.liabilities()[i]);
  }
  return s;
}

}  // namespace sysrisk
