#include "sysrisk/dense_matrix.hpp"

namespace sysrisk {

std::vector<double> DenseMatrix::row_sums() const {
  std::vector<double> sums(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    double s = 0.0;
    for (double v : row(i)) s += v;
    sums[i] = s;
  }
  return sums;
}

std::vector<double> DenseMatrix::column_sums() const {
  std::vector<double> sums(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    const auto r = row(i);
    for (std::size_t j = 0; j < n_; ++j) sums[j] += r[j];
  }
  return sums;
}

DenseMatrix DenseMatrix::transposed() const {
  DenseMatrix t(n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

}  // namespace sysrisk
