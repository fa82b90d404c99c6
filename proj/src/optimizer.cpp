#include "sysrisk/optimizer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "sysrisk/error.hpp"
#include "sysrisk/kernels.hpp"

namespace sysrisk {

std::string to_string(Direction d) {
  return d == Direction::kMinimize ? "minimize" : "maximize";
}

Direction parse_direction(const std::string& name) {
  if (name == "minimize" || name == "min") return Direction::kMinimize;
  if (name == "maximize" || name == "max") return Direction::kMaximize;
  throw Error(ErrorCode::kInvalidArgument, "unknown direction '" + name + "'");
}

double BetaSchedule::at(int sweep, int n_max, std::size_t n_banks) const {
  if (kind == Kind::kConstant) return value;
  const double beta0 =
      value > 0.0 ? value : 10.0 * static_cast<double>(n_banks) * static_cast<double>(n_banks);
  return beta0 * std::pow(factor, static_cast<double>(sweep) / static_cast<double>(n_max));
}

void AnnealConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::kInvalidArgument, m); };
  if (sweeps < 1) fail("sweeps must be positive");
  if (trial_terms < 1) fail("trial_terms must be positive");
  if (final_terms < 4) fail("final_terms must be at least 4");
  if (trial_terms > final_terms) fail("trial_terms must not exceed final_terms");
  if (!(beta_k >= 0.0) || !(beta_asym >= 0.0)) fail("penalty weights must be non-negative");
  if (!(full_transfer_prob >= 0.0 && full_transfer_prob <= 1.0))
    fail("full_transfer_prob must lie in [0, 1]");
  if (beta.kind == BetaSchedule::Kind::kConstant && !(beta.value > 0.0))
    fail("constant beta must be positive");
  if (beta.kind == BetaSchedule::Kind::kGeometric && !(beta.factor > 0.0))
    fail("geometric beta factor must be positive");
  if (resync_interval < 1) fail("resync_interval must be positive");
  if (assortativity_bins < 2) fail("assortativity_bins must be at least 2");
}

DenseMatrix proportional_fill(const BankSet& bs) {
  const auto& a = bs.asset_share();
  const auto& l = bs.liability_share();
  const double total = std::accumulate(a.begin(), a.end(), 0.0);
  const std::size_t n = bs.size();
  DenseMatrix alpha(n);
  if (total <= 0.0) return alpha;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) alpha(i, j) = a[i] * l[j] / total;
  return alpha;
}

EliminationStats eliminate_diagonal(DenseMatrix& alpha, double zero_threshold,
                                    std::span<const std::size_t> block) {
  std::vector<std::size_t> idx;
  if (block.empty()) {
    idx.resize(alpha.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
  } else {
    idx.assign(block.begin(), block.end());
  }
  for (std::size_t i : idx)
    if (alpha(i, i) <= zero_threshold) alpha(i, i) = 0.0;

  EliminationStats stats;
  for (;;) {
    // Two largest remaining diagonal entries.
    std::size_t first = alpha.size(), second = alpha.size();
    for (std::size_t i : idx) {
      if (alpha(i, i) == 0.0) continue;
      if (first == alpha.size() || alpha(i, i) > alpha(first, first)) {
        second = first;
        first = i;
      } else if (second == alpha.size() || alpha(i, i) > alpha(second, second)) {
        second = i;
      }
    }
    if (first == alpha.size()) break;

    if (second != alpha.size()) {
      // Subtract D(i1,i1,i2,i2): diagonal mass moves onto (i1,i2) and (i2,i1).
      const double d = alpha(second, second);
      alpha(first, second) += d;
      alpha(second, first) += d;
      alpha(second, second) = 0.0;
      alpha(first, first) -= d;
      if (alpha(first, first) <= zero_threshold) alpha(first, first) = 0.0;
      ++stats.paired_moves;
      continue;
    }

    // Lone entry (i1,i1): subtract D(i1,i1,i2,j2) against the largest cell
    // (i2,j2) with i2 ≠ i1 and j2 ∉ {i1, i2}.
    const std::size_t i1 = first;
    while (alpha(i1, i1) > 0.0) {
      std::size_t bi = alpha.size(), bj = alpha.size();
      double best = 0.0;
      for (std::size_t i2 : idx) {
        if (i2 == i1) continue;
        for (std::size_t j2 : idx) {
          if (j2 == i1 || j2 == i2) continue;
          if (alpha(i2, j2) > best) {
            best = alpha(i2, j2);
            bi = i2;
            bj = j2;
          }
        }
      }
      if (bi == alpha.size() || best <= zero_threshold) {
        throw Error(ErrorCode::kInfeasibleMargins,
                    "cannot remove diagonal entry of bank " + std::to_string(i1) +
                        ": no eligible off-diagonal mass");
      }
      const double d = std::min(alpha(i1, i1), best);
      alpha(i1, bj) += d;
      alpha(bi, i1) += d;
      if (d == best) {
        alpha(bi, bj) = 0.0;
        alpha(i1, i1) -= d;
      } else {
        alpha(bi, bj) -= d;
        alpha(i1, i1) = 0.0;
      }
      if (alpha(i1, i1) <= zero_threshold) alpha(i1, i1) = 0.0;
      if (alpha(bi, bj) <= zero_threshold) alpha(bi, bj) = 0.0;
      ++stats.final_moves;
    }
  }
  return stats;
}

ExposureMatrix initial_feasible_matrix(std::shared_ptr<const BankSet> bs) {
  if (!bs) throw Error(ErrorCode::kInvalidArgument, "null bank set");
  DenseMatrix alpha = proportional_fill(*bs);
  eliminate_diagonal(alpha, bs->zero_threshold());
  ExposureMatrix m(bs, std::move(alpha));
  const auto report = validate_exposures(m);
  if (!report.ok()) {
    throw Error(ErrorCode::kInfeasibleMargins,
                "initial matrix violates constraints: " + report.describe());
  }
  return m;
}

DMove propose_d_move(const DenseMatrix& alpha, double zero_threshold, double full_transfer_prob,
                     Rng& rng) {
  const std::size_t n = alpha.size();
  if (n < 4) throw Error(ErrorCode::kInvalidArgument, "D-moves need at least 4 banks");
  DMove mv;
  for (;;) {
    mv.i1 = uniform_index(rng, n);
    mv.i2 = uniform_index(rng, n);
    mv.j1 = uniform_index(rng, n);
    mv.j2 = uniform_index(rng, n);
    if (mv.i1 == mv.i2 || mv.j1 == mv.j2) continue;
    if (mv.j1 == mv.i1 || mv.j1 == mv.i2 || mv.j2 == mv.i1 || mv.j2 == mv.i2) continue;
    break;
  }
  const double m_d = std::min(alpha(mv.i1, mv.j2), alpha(mv.i2, mv.j1));
  if (m_d <= zero_threshold) {
    mv.null = true;
    return mv;
  }
  if (uniform01(rng) < full_transfer_prob) {
    mv.d = m_d;
  } else {
    // (0, m_d]: 1 − U with U ∈ [0,1).
    mv.d = (1.0 - uniform01(rng)) * m_d;
    if (m_d - mv.d <= zero_threshold) mv.d = m_d;
  }
  return mv;
}

namespace {

struct Cell {
  std::size_t row, col;
  double delta;
};

std::array<Cell, 4> cells_of(const DMove& mv) {
  return {{{mv.i1, mv.j1, mv.d}, {mv.i2, mv.j2, mv.d}, {mv.i1, mv.j2, -mv.d},
           {mv.i2, mv.j1, -mv.d}}};
}

// New value of one moved cell. A donor holding exactly the transferred
// minimum becomes exactly 0; donors left with residue below ε_zero snap to 0.
double moved_value(double old, double delta, double d, double m_d, double zero_threshold) {
  if (delta > 0.0) return old + delta;
  if (d >= m_d && old == m_d) return 0.0;
  const double v = old + delta;
  return v <= zero_threshold ? 0.0 : v;
}

}  // namespace

void apply_d_move(DenseMatrix& alpha, const DMove& move, double zero_threshold) {
  if (move.null) return;
  const double m_d = std::min(alpha(move.i1, move.j2), alpha(move.i2, move.j1));
  for (const auto& c : cells_of(move)) {
    double& v = alpha(c.row, c.col);
    v = moved_value(v, c.delta, move.d, m_d, zero_threshold);
  }
}

bool metropolis_accept(double delta_f, double beta, Rng& rng) {
  if (delta_f >= 0.0) return true;
  return uniform01(rng) < std::exp(beta * delta_f);
}

double objective(const ExposureMatrix& m, const AnnealConfig& cfg) {
  const double psi = psi_series(lambda_from_exposures(m), cfg.trial_terms);
  const double sign = cfg.direction == Direction::kMaximize ? 1.0 : -1.0;
  return sign * psi - cfg.beta_k * mean_degree(m.alpha()) -
         cfg.beta_asym * symmetry_ratio(m.alpha());
}

namespace {

// One Markov chain. Keeps α and Λ in step, with the penalty sums maintained
// incrementally between sweeps and rebuilt from scratch at every sweep end.
class Chain {
 public:
  Chain(const BankSet& bs, const AnnealConfig& cfg, DenseMatrix alpha)
      : bs_(bs),
        cfg_(cfg),
        n_(bs.size()),
        eps_(bs.zero_threshold()),
        alpha_(std::move(alpha)),
        lambda_(n_),
        e_(bs.equity_share()),
        workspace_(n_),
        sign_(cfg.direction == Direction::kMaximize ? 1.0 : -1.0),
        rng_(make_rng(cfg.rng_seed)) {
    rebuild_lambda();
    resync();
  }

  void run_sweep(int sweep, AnnealResult& result, const SweepObserver& observer) {
    const double beta = cfg_.beta.at(sweep, cfg_.sweeps, n_);
    const std::uint64_t trials = static_cast<std::uint64_t>(n_) * n_;
    std::uint64_t accepted = 0;
    for (std::uint64_t k = 0; k < trials; ++k) {
      const DMove mv = propose_d_move(alpha_, eps_, cfg_.full_transfer_prob, rng_);
      ++result.proposals;
      if (mv.null) {
        ++result.null_proposals;
        continue;
      }
      if (try_move(mv, beta)) ++accepted;
    }
    result.accepted += accepted;

    if ((sweep + 1) % cfg_.resync_interval == 0) {
      reproject_margins();
      rebuild_lambda();
    }
    resync();

    TraceRecord rec;
    rec.n = sweep;
    rec.psi = workspace_.series_sum(lambda_, e_, cfg_.final_terms);
    rec.lambda = power_iteration(lambda_).value;
    rec.assortativity =
        assortativity_coefficient(alpha_, source_values(), target_values(), cfg_.assortativity_bins);
    rec.mean_degree = static_cast<double>(edges_) / static_cast<double>(n_);
    rec.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(trials);
    result.trace.push_back(rec);
    if (observer) observer(rec);
  }

  DenseMatrix take_matrix() { return std::move(alpha_); }

 private:
  double evaluate(double psi, long edges, double cross, double sq) const {
    const double sym = sq > 0.0 ? cross / sq : 0.0;
    return sign_ * psi - cfg_.beta_k * static_cast<double>(edges) / static_cast<double>(n_) -
           cfg_.beta_asym * sym;
  }

  bool try_move(const DMove& mv, double beta) {
    const auto cells = cells_of(mv);
    const double m_d = std::min(alpha_(mv.i1, mv.j2), alpha_(mv.i2, mv.j1));
    std::array<double, 4> old_alpha{}, old_lambda{};
    long edges = edges_;
    double cross = cross_, sq = sq_;
    for (std::size_t k = 0; k < 4; ++k) {
      const auto& c = cells[k];
      const double old = alpha_(c.row, c.col);
      old_alpha[k] = old;
      old_lambda[k] = lambda_(c.row, c.col);
      const double updated = moved_value(old, c.delta, mv.d, m_d, eps_);
      edges += (updated > 0.0 ? 1 : 0) - (old > 0.0 ? 1 : 0);
      // The transposed cell is never one of the four moved cells.
      cross += 2.0 * (updated - old) * alpha_(c.col, c.row);
      sq += updated * updated - old * old;
      alpha_(c.row, c.col) = updated;
      lambda_(c.row, c.col) = updated / e_[c.row];
    }
    const double psi = workspace_.series_sum(lambda_, e_, cfg_.trial_terms);
    const double f = evaluate(psi, edges, cross, sq);
    if (metropolis_accept(f - f_, beta, rng_)) {
      edges_ = edges;
      cross_ = cross;
      sq_ = sq;
      psi_ = psi;
      f_ = f;
      return true;
    }
    for (std::size_t k = 0; k < 4; ++k) {
      alpha_(cells[k].row, cells[k].col) = old_alpha[k];
      lambda_(cells[k].row, cells[k].col) = old_lambda[k];
    }
    return false;
  }

  void rebuild_lambda() {
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) lambda_(i, j) = alpha_(i, j) / e_[i];
  }

  void resync() {
    edges_ = 0;
    cross_ = 0.0;
    sq_ = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) {
        const double v = alpha_(i, j);
        if (v > 0.0) ++edges_;
        cross_ += v * alpha_(j, i);
        sq_ += v * v;
      }
    }
    psi_ = workspace_.series_sum(lambda_, e_, cfg_.trial_terms);
    f_ = evaluate(psi_, edges_, cross_, sq_);
  }

  // Two passes of iterative proportional fitting on the current support.
  void reproject_margins() {
    const auto& a = bs_.asset_share();
    const auto& l = bs_.liability_share();
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t i = 0; i < n_; ++i) {
        double s = 0.0;
        for (double v : alpha_.row(i)) s += v;
        if (s > 0.0)
          for (double& v : alpha_.row(i)) v *= a[i] / s;
      }
      const auto cols = alpha_.column_sums();
      for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < n_; ++j)
          if (cols[j] > 0.0) alpha_(i, j) *= l[j] / cols[j];
    }
  }

  const std::vector<double>& source_values() {
    if (source_.empty()) source_ = node_property_values(bs_, cfg_.source_property);
    return source_;
  }
  const std::vector<double>& target_values() {
    if (target_.empty()) target_ = node_property_values(bs_, cfg_.target_property);
    return target_;
  }

  const BankSet& bs_;
  const AnnealConfig& cfg_;
  std::size_t n_;
  double eps_;
  DenseMatrix alpha_;
  DenseMatrix lambda_;
  std::vector<double> e_;
  kernels::SeriesWorkspace workspace_;
  double sign_;
  Rng rng_;

  long edges_ = 0;
  double cross_ = 0.0;
  double sq_ = 0.0;
  double psi_ = 0.0;
  double f_ = 0.0;
  std::vector<double> source_, target_;
};

}  // namespace

AnnealResult anneal(std::shared_ptr<const BankSet> bs, const AnnealConfig& cfg,
                    std::optional<ExposureMatrix> initial, const SweepObserver& observer) {
  if (!bs) throw Error(ErrorCode::kInvalidArgument, "null bank set");
  cfg.validate();
  if (bs->size() < 4) throw Error(ErrorCode::kInvalidArgument, "annealing needs at least 4 banks");
  ExposureMatrix start = initial ? std::move(*initial) : initial_feasible_matrix(bs);
  if (start.bank_ptr().get() != bs.get() && start.size() != bs->size()) {
    throw Error(ErrorCode::kDimensionMismatch, "initial matrix does not match the bank set");
  }
  const auto report = validate_exposures(ExposureMatrix(bs, start.alpha()));
  if (!report.ok()) {
    throw Error(ErrorCode::kInfeasibleMargins, "initial matrix infeasible: " + report.describe());
  }

  AnnealResult result{ExposureMatrix(bs, DenseMatrix(bs->size())), {}, {}, 0, 0, 0};
  result.trace.reserve(static_cast<std::size_t>(cfg.sweeps));
  Chain chain(*bs, cfg, start.alpha());
  for (int sweep = 0; sweep < cfg.sweeps; ++sweep) chain.run_sweep(sweep, result, observer);
  result.matrix = ExposureMatrix(bs, chain.take_matrix());
  result.report = psi_full(result.matrix, cfg.final_terms);
  return result;
}

}  // namespace sysrisk
