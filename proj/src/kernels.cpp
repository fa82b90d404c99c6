#include "sysrisk/kernels.hpp"

#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sysrisk::kernels {
namespace {

bool use_threads(std::size_t n) {
#ifdef _OPENMP
  return n >= kParallelThreshold && !omp_in_parallel() && omp_get_max_threads() > 1;
#else
  (void)n;
  return false;
#endif
}

double row_dot(std::span<const double> row, std::span<const double> x) {
  double s = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) s += row[j] * x[j];
  return s;
}

// Column block [j0, j1) of yᵀ = xᵀ M; accumulates over rows in increasing i.
void vecmat_block(std::span<const double> x, const DenseMatrix& m, std::span<double> y,
                  std::size_t j0, std::size_t j1) {
  for (std::size_t j = j0; j < j1; ++j) y[j] = 0.0;
  const std::size_t n = m.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = x[i];
    const auto r = m.row(i);
    for (std::size_t j = j0; j < j1; ++j) y[j] += xi * r[j];
  }
}

double sum(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

namespace serial {

void matvec(const DenseMatrix& m, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < m.size(); ++i) y[i] = row_dot(m.row(i), x);
}

void vecmat(std::span<const double> x, const DenseMatrix& m, std::span<double> y) {
  vecmat_block(x, m, y, 0, m.size());
}

std::vector<double> series_terms(const DenseMatrix& m, std::span<const double> w,
                                 int n_terms) {
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(n_terms > 0 ? n_terms : 0));
  std::vector<double> cur(w.begin(), w.end());
  std::vector<double> next(w.size());
  for (int t = 0; t < n_terms; ++t) {
    terms.push_back(sum(cur));
    if (t + 1 < n_terms) {
      vecmat(cur, m, next);
      cur.swap(next);
    }
  }
  return terms;
}

double series_sum(const DenseMatrix& m, std::span<const double> w, int n_terms) {
  double total = 0.0;
  for (double t : series_terms(m, w, n_terms)) total += t;
  return total;
}

}  // namespace serial

void matvec(const DenseMatrix& m, std::span<const double> x, std::span<double> y) {
  const std::size_t n = m.size();
  if (!use_threads(n)) return serial::matvec(m, x, y);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) y[i] = row_dot(m.row(i), x);
}

void vecmat(std::span<const double> x, const DenseMatrix& m, std::span<double> y) {
  const std::size_t n = m.size();
  if (!use_threads(n)) return serial::vecmat(x, m, y);
#pragma omp parallel
  {
#ifdef _OPENMP
    const std::size_t nt = static_cast<std::size_t>(omp_get_num_threads());
    const std::size_t tid = static_cast<std::size_t>(omp_get_thread_num());
#else
    const std::size_t nt = 1, tid = 0;
#endif
    const std::size_t chunk = (n + nt - 1) / nt;
    const std::size_t j0 = std::min(n, tid * chunk);
    const std::size_t j1 = std::min(n, j0 + chunk);
    vecmat_block(x, m, y, j0, j1);
  }
}

std::vector<double> series_terms(const DenseMatrix& m, std::span<const double> w,
                                 int n_terms) {
  if (!use_threads(m.size())) return serial::series_terms(m, w, n_terms);
  std::vector<double> terms;
  std::vector<double> cur(w.begin(), w.end());
  std::vector<double> next(w.size());
  for (int t = 0; t < n_terms; ++t) {
    terms.push_back(sum(cur));
    if (t + 1 < n_terms) {
      vecmat(cur, m, next);
      cur.swap(next);
    }
  }
  return terms;
}

double series_sum(const DenseMatrix& m, std::span<const double> w, int n_terms) {
  double total = 0.0;
  for (double t : series_terms(m, w, n_terms)) total += t;
  return total;
}

double SeriesWorkspace::series_sum(const DenseMatrix& m, std::span<const double> w,
                                   int n_terms) {
  std::copy(w.begin(), w.end(), current_.begin());
  double total = 0.0;
  for (int t = 0; t < n_terms; ++t) {
    total += sum(current_);
    if (t + 1 < n_terms) {
      kernels::vecmat(current_, m, next_);
      current_.swap(next_);
    }
  }
  return total;
}

}  // namespace sysrisk::kernels
