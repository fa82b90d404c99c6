#include "sysrisk/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sysrisk/error.hpp"
#include "sysrisk/kernels.hpp"
#include "sysrisk/random.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sysrisk {
namespace {

double weighted_sum(std::span<const double> h, std::span<const double> e) {
  double s = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) s += h[i] * e[i];
  return s;
}

void check_size(const LambdaMatrix& lm, std::size_t n) {
  if (n != lm.size()) throw Error(ErrorCode::kDimensionMismatch, "vector length != matrix size");
}

}  // namespace

PropagationResult propagate(const LambdaMatrix& lm, std::span<const double> h1, int t_max) {
  check_size(lm, h1.size());
  if (t_max < 1) throw Error(ErrorCode::kInvalidArgument, "t_max must be at least 1");
  for (double v : h1) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::kInvalidArgument, "initial shock must be finite and non-negative");
    }
  }

  const std::size_t n = lm.size();
  const auto& e = lm.equity_share();
  PropagationResult result;
  result.bankrupt.assign(n, false);
  result.states.reserve(static_cast<std::size_t>(t_max));

  std::vector<double> h(h1.begin(), h1.end());
  std::vector<double> term(h1.begin(), h1.end());
  std::vector<double> next(n);

  auto record = [&](int t) {
    for (std::size_t i = 0; i < n; ++i)
      if (h[i] >= kBankruptcyLevel) result.bankrupt[i] = true;
    result.states.push_back({t, h, weighted_sum(h, e)});
  };

  record(1);
  for (int t = 2; t <= t_max; ++t) {
    kernels::matvec(lm.values(), term, next);
    term.swap(next);
    std::vector<double> candidate(n);
    bool diverged = false;
    for (std::size_t i = 0; i < n; ++i) {
      candidate[i] = h[i] + term[i];
      if (!std::isfinite(candidate[i]) || std::abs(candidate[i]) > kDivergenceGuard) {
        diverged = true;
      }
    }
    if (diverged) {
      result.overflowed = true;
      break;
    }
    h.swap(candidate);
    record(t);
  }
  return result;
}

std::vector<double> h_infinity_exact(const LambdaMatrix& lm, std::span<const double> h1) {
  check_size(lm, h1.size());
  const double lambda = spectral_radius(lm);
  if (lambda >= 1.0 - kSupercriticalMargin) {
    throw Error(ErrorCode::kSupercriticalSystem,
                "spectral radius " + std::to_string(lambda) + " >= 1: no finite h_infinity");
  }
  const std::size_t n = lm.size();
  DenseMatrix a(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = (i == j ? 1.0 : 0.0) - lm(i, j);
  return solve_linear(std::move(a), std::vector<double>(h1.begin(), h1.end()));
}

bool InitialShock::all_feasible() const {
  return std::all_of(feasible.begin(), feasible.end(), [](bool f) { return f; });
}

InitialShock initial_shock_from_target(const LambdaMatrix& lm, std::span<const double> h_inf) {
  check_size(lm, h_inf.size());
  const std::size_t n = lm.size();
  InitialShock out;
  out.h1.resize(n);
  out.feasible.resize(n);
  kernels::matvec(lm.values(), h_inf, out.h1);
  for (std::size_t i = 0; i < n; ++i) {
    out.h1[i] = h_inf[i] - out.h1[i];
    out.feasible[i] = out.h1[i] >= 0.0;
  }
  return out;
}

namespace {

// Samples are summarised in fixed blocks; block partial sums are combined in
// block order, which makes the mean independent of scheduling.
constexpr std::uint64_t kSampleBlock = 1024;

struct BlockSummary {
  std::vector<double> min, max, sum;
  std::uint64_t feasible = 0;

  explicit BlockSummary(std::size_t n)
      : min(n, std::numeric_limits<double>::infinity()),
        max(n, -std::numeric_limits<double>::infinity()),
        sum(n, 0.0) {}
};

void run_block(const LambdaMatrix& lm, std::uint64_t first, std::uint64_t last,
               std::uint64_t seed, BlockSummary& out) {
  const std::size_t n = lm.size();
  std::vector<double> target(n), h1(n);
  for (std::uint64_t k = first; k < last; ++k) {
    Rng rng = make_rng(seed, k);
    for (auto& v : target) v = uniform01(rng);
    kernels::serial::matvec(lm.values(), target, h1);
    bool ok = true;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = target[i] - h1[i];
      out.min[i] = std::min(out.min[i], v);
      out.max[i] = std::max(out.max[i], v);
      out.sum[i] += v;
      ok = ok && v >= 0.0;
    }
    if (ok) ++out.feasible;
  }
}

ShockRanges combine(const std::vector<BlockSummary>& blocks, std::size_t n,
                    std::uint64_t n_samples) {
  ShockRanges r;
  r.samples = n_samples;
  r.min.assign(n, std::numeric_limits<double>::infinity());
  r.max.assign(n, -std::numeric_limits<double>::infinity());
  r.mean.assign(n, 0.0);
  std::uint64_t feasible = 0;
  for (const auto& b : blocks) {
    for (std::size_t i = 0; i < n; ++i) {
      r.min[i] = std::min(r.min[i], b.min[i]);
      r.max[i] = std::max(r.max[i], b.max[i]);
      r.mean[i] += b.sum[i];
    }
    feasible += b.feasible;
  }
  for (auto& m : r.mean) m /= static_cast<double>(n_samples);
  r.feasible_fraction = static_cast<double>(feasible) / static_cast<double>(n_samples);
  return r;
}

void check_samples(std::uint64_t n_samples) {
  if (n_samples == 0) throw Error(ErrorCode::kInvalidArgument, "need at least one sample");
}

}  // namespace

namespace serial {

ShockRanges sample_no_bankruptcy_shocks(const LambdaMatrix& lm, std::uint64_t n_samples,
                                        std::uint64_t rng_seed) {
  check_samples(n_samples);
  const std::uint64_t n_blocks = (n_samples + kSampleBlock - 1) / kSampleBlock;
  std::vector<BlockSummary> blocks(n_blocks, BlockSummary(lm.size()));
  for (std::uint64_t b = 0; b < n_blocks; ++b) {
    run_block(lm, b * kSampleBlock, std::min(n_samples, (b + 1) * kSampleBlock), rng_seed,
              blocks[b]);
  }
  return combine(blocks, lm.size(), n_samples);
}

}  // namespace serial

ShockRanges sample_no_bankruptcy_shocks(const LambdaMatrix& lm, std::uint64_t n_samples,
                                        std::uint64_t rng_seed) {
  check_samples(n_samples);
  const std::uint64_t n_blocks = (n_samples + kSampleBlock - 1) / kSampleBlock;
  std::vector<BlockSummary> blocks(n_blocks, BlockSummary(lm.size()));
  const auto nb = static_cast<std::int64_t>(n_blocks);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t b = 0; b < nb; ++b) {
    const auto ub = static_cast<std::uint64_t>(b);
    run_block(lm, ub * kSampleBlock, std::min(n_samples, (ub + 1) * kSampleBlock), rng_seed,
              blocks[ub]);
  }
  return combine(blocks, lm.size(), n_samples);
}

}  // namespace sysrisk
