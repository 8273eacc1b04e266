#pragma once

#include <functional>
#include <span>

#include "mmd/matrix.hpp"

namespace mmd {

using ScalarFunction = std::function<double(std::span<const double>)>;

/// Central-difference gradient (f(x + h e_j) - f(x - h e_j)) / 2h.
/// Throws InvalidInput when h <= 0 and Training when f is non-finite.
Vector finite_difference_gradient(const ScalarFunction& f, std::span<const double> x,
                                  double h = 1e-5);

/// Same, restricted to the coordinates in `indices`; other entries are 0.
Vector finite_difference_gradient(const ScalarFunction& f, std::span<const double> x,
                                  std::span<const std::size_t> indices, double h = 1e-5);

/// |a - b| / max(|a|, |b|), with 0 when both vanish.
double relative_error(std::span<const double> analytic, std::span<const double> numeric);

}  // namespace mmd
