#include "mmd/kernels.hpp"

namespace mmd::kernels::serial {

void gemv(const Matrix& a, std::span<const double> x, std::span<double> y) {
  const std::size_t cols = a.cols();
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const double* row = a.data() + r * cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
}

void gemv_t_add(const Matrix& a, std::span<const double> x, std::span<double> y) {
  const std::size_t cols = a.cols();
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const double* row = a.data() + r * cols;
    const double xr = x[r];
    for (std::size_t c = 0; c < cols; ++c) y[c] += row[c] * xr;
  }
}

void rank1_update(Matrix& a, double alpha, std::span<const double> x,
                  std::span<const double> y) {
  const std::size_t cols = a.cols();
  for (std::size_t r = 0; r < a.rows(); ++r) {
    double* row = a.data() + r * cols;
    const double s = alpha * x[r];
    for (std::size_t c = 0; c < cols; ++c) row[c] += s * y[c];
  }
}

void squared_distances(const Matrix& points, std::span<const double> query,
                       std::span<double> out) {
  const std::size_t cols = points.cols();
  for (std::size_t r = 0; r < points.rows(); ++r) {
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
  for (std::size_t i = 0; i < n; ++i) {
    const double* pi = points.data() + i * cols;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double* pj = points.data() + j * cols;
      double acc = 0.0;
      for (std::size_t c = 0; c < cols; ++c) {
        const double d = pi[c] - pj[c];
        acc += d * d;
      }
      condensed[condensed_index(n, i, j)] = acc;
    }
  }
}

}  // namespace mmd::kernels::serial
