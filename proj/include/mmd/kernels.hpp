#pragma once

// Dense kernels used by training, retrieval and clustering.
//
// Every kernel has a serial reference in `kernels::serial` and an OpenMP
// version in `kernels::omp`. The OpenMP versions split work over output
// elements only; each output is accumulated in the same order as the serial
// reference, so both produce bit-identical results for any thread count.
// Library code calls the unqualified `kernels::` entry points, which forward
// to the OpenMP versions.

#include <cstddef>
#include <span>
#include <utility>

#include "mmd/matrix.hpp"

namespace mmd::kernels {

namespace serial {
/// y = A x
void gemv(const Matrix& a, std::span<const double> x, std::span<double> y);
/// y += A^T x
void gemv_t_add(const Matrix& a, std::span<const double> x, std::span<double> y);
/// A += alpha * x y^T
void rank1_update(Matrix& a, double alpha, std::span<const double> x,
                  std::span<const double> y);
/// out[i] = |points.row(i) - query|^2
void squared_distances(const Matrix& points, std::span<const double> query,
                       std::span<double> out);
/// Condensed upper triangle of squared distances; see condensed_index().
void pairwise_squared_distances(const Matrix& points, std::span<double> condensed);
}  // namespace serial

namespace omp {
/// y = A x
void gemv(const Matrix& a, std::span<const double> x, std::span<double> y);
/// y += A^T x
void gemv_t_add(const Matrix& a, std::span<const double> x, std::span<double> y);
/// A += alpha * x y^T
void rank1_update(Matrix& a, double alpha, std::span<const double> x,
                  std::span<const double> y);
/// out[i] = |points.row(i) - query|^2
void squared_distances(const Matrix& points, std::span<const double> query,
                       std::span<double> out);
/// Condensed upper triangle of squared distances; see condensed_index().
void pairwise_squared_distances(const Matrix& points, std::span<double> condensed);
}  // namespace omp

inline std::size_t condensed_size(std::size_t n) { return n * (n - (n > 0 ? 1 : 0)) / 2; }

inline std::size_t condensed_index(std::size_t n, std::size_t i, std::size_t j) {
  if (i > j) std::swap(i, j);
  return i * n - i * (i + 1) / 2 + (j - i - 1);
}

inline void gemv(const Matrix& a, std::span<const double> x, std::span<double> y) {
  omp::gemv(a, x, y);
}
inline void gemv_t_add(const Matrix& a, std::span<const double> x, std::span<double> y) {
  omp::gemv_t_add(a, x, y);
}
inline void rank1_update(Matrix& a, double alpha, std::span<const double> x,
                         std::span<const double> y) {
  omp::rank1_update(a, alpha, x, y);
}
inline void squared_distances(const Matrix& points, std::span<const double> query,
                              std::span<double> out) {
  omp::squared_distances(points, query, out);
}
inline void pairwise_squared_distances(const Matrix& points, std::span<double> condensed) {
  omp::pairwise_squared_distances(points, condensed);
}

}  // namespace mmd::kernels
