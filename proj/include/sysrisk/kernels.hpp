#pragma once

// Dense kernels behind Ψ evaluation and shock propagation.
//
// Every kernel has a `serial` reference and an OpenMP version. The parallel
// versions partition output entries across threads and keep the per-entry
// summation order of the reference, so results are bit-identical to the
// serial path regardless of thread count. Small problems (and calls made
// from inside an active parallel region) fall through to the serial path.

#include <cstddef>
#include <span>
#include <vector>

#include "sysrisk/dense_matrix.hpp"

namespace sysrisk::kernels {

// Matrices below this size never spawn threads.
inline constexpr std::size_t kParallelThreshold = 128;

namespace serial {

// y = M x
void matvec(const DenseMatrix& m, std::span<const double> x, std::span<double> y);
// yᵀ = xᵀ M
void vecmat(std::span<const double> x, const DenseMatrix& m, std::span<double> y);
// terms[t] = wᵀ Mᵗ 1 for t = 0 .. n_terms-1
std::vector<double> series_terms(const DenseMatrix& m, std::span<const double> w,
                                 int n_terms);
// Σ_t wᵀ Mᵗ 1, summed in increasing t.
double series_sum(const DenseMatrix& m, std::span<const double> w, int n_terms);

}  // namespace serial

void matvec(const DenseMatrix& m, std::span<const double> x, std::span<double> y);
void vecmat(std::span<const double> x, const DenseMatrix& m, std::span<double> y);
std::vector<double> series_terms(const DenseMatrix& m, std::span<const double> w,
                                 int n_terms);
double series_sum(const DenseMatrix& m, std::span<const double> w, int n_terms);

// Reusable buffers for the hot loop of the optimizer, where Ψ is evaluated
// once per proposal and allocation would dominate for small N.
class SeriesWorkspace {
 public:
  explicit SeriesWorkspace(std::size_t n) : current_(n), next_(n) {}
  double series_sum(const DenseMatrix& m, std::span<const double> w, int n_terms);

 private:
  std::vector<double> current_;
  std::vector<double> next_;
};

}  // namespace sysrisk::kernels
