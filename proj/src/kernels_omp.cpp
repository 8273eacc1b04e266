#include <omp.h>

#include <algorithm>
#include <cstdint>

#include "mmd/kernels.hpp"

namespace mmd::kernels::omp {

namespace {
// Below this many multiply-adds the fork/join cost dominates.
constexpr std::size_t kParallelWork = 1u << 15;
}  // namespace

void gemv(const Matrix& a, std::span<const double> x, std::span<double> y) {
  const std::int64_t rows = static_cast<std::int64_t>(a.rows());
  const std::size_t cols = a.cols();
#pragma omp parallel for schedule(static) if (a.size() > kParallelWork)
  for (std::int64_t r = 0; r < rows; ++r) {
    const double* row = a.data() + r * cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
}

void gemv_t_add(const Matrix& a, std::span<const double> x, std::span<double> y) {
  // Each thread owns a block of output columns and walks rows in order, so
  // every y[c] sums its terms in the serial order.
  const std::size_t rows = a.rows();
  const std::size_t cols = a.cols();
  constexpr std::int64_t kBlock = 256;
  const std::int64_t blocks = static_cast<std::int64_t>((cols + kBlock - 1) / kBlock);
#pragma omp parallel for schedule(static) if (a.size() > kParallelWork)
  for (std::int64_t b = 0; b < blocks; ++b) {
    const std::size_t lo = static_cast<std::size_t>(b * kBlock);
    const std::size_t hi = std::min(cols, lo + kBlock);
    for (std::size_t r = 0; r < rows; ++r) {
      const double* row = a.data() + r * cols;
      const double xr = x[r];
      for (std::size_t c = lo; c < hi; ++c) y[c] += row[c] * xr;
    }
  }
}

void rank1_update(Matrix& a, double alpha, std::span<const double> x,
                  std::span<const double> y) {
  const std::int64_t rows = static_cast<std::int64_t>(a.rows());
  const std::size_t cols = a.cols();
#pragma omp parallel for schedule(static) if (a.size() > kParallelWork)
  for (std::int64_t r = 0; r < rows; ++r) {
    double* row = a.data() + r * cols;
    const double s = alpha * x[r];
    for (std::size_t c = 0; c < cols; ++c) row[c] += s * y[c];
  }
}

void squared_distances(const Matrix& points, std::span<const double> query,
                       std::span<double> out) {
  const std::int64_t rows = static_cast<std::int64_t>(points.rows());
  const std::size_t cols = points.cols();
#pragma omp parallel for schedule(static) if (points.size() > kParallelWork)
  for (std::int64_t r = 0; r < rows; ++r) {
    const double* row = points.data() + r * cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      const double d = row[c] - query[c];
      acc += d * d;
    }
    out[r] = acc;
  }
}

void pairwise_squared_distances(const Matrix& points, std::span<double> condensed) {
  const std::size_t n = points.rows();
  const std::size_t cols = points.cols();
  const std::int64_t rows = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 8) if (n * n * cols > kParallelWork)
  for (std::int64_t i = 0; i < rows; ++i) {
    const double* pi = points.data() + i * cols;
    for (std::size_t j = static_cast<std::size_t>(i) + 1; j < n; ++j) {
      const double* pj = points.data() + j * cols;
      double acc = 0.0;
      for (std::size_t c = 0; c < cols; ++c) {
        const double d = pi[c] - pj[c];
        acc += d * d;
      }
      condensed[condensed_index(n, static_cast<std::size_t>(i), j)] = acc;
    }
  }
}

}  // namespace mmd::kernels::omp
