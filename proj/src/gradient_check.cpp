#include "mmd/gradient_check.hpp"

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "mmd/numerics.hpp"

namespace mmd {

namespace {

double evaluate(const ScalarFunction& f, std::span<const double> x) {
  const double v = f(x);
  if (!std::isfinite(v)) fail(ErrorKind::Training, "finite_difference_gradient: f is non-finite");
  return v;
}

}  // namespace

Vector finite_difference_gradient(const ScalarFunction& f, std::span<const double> x,
                                  std::span<const std::size_t> indices, double h) {
  if (!(h > 0.0)) fail(ErrorKind::InvalidInput, "finite_difference_gradient: step must be > 0");
  Vector probe(x.begin(), x.end());
  Vector grad(x.size(), 0.0);
  for (std::size_t j : indices) {
    const double saved = probe[j];
    probe[j] = saved + h;
    const double up = evaluate(f, probe);
    probe[j] = saved - h;
    const double down = evaluate(f, probe);
    probe[j] = saved;
    grad[j] = (up - down) / (2.0 * h);
  }
  return grad;
}

Vector finite_difference_gradient(const ScalarFunction& f, std::span<const double> x, double h) {
  std::vector<std::size_t> all(x.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return finite_difference_gradient(f, x, all, h);
}

double relative_error(std::span<const double> analytic, std::span<const double> numeric) {
  if (analytic.size() != numeric.size()) fail(ErrorKind::Shape, "relative_error: length mismatch");
  double diff = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double d = analytic[i] - numeric[i];
    diff += d * d;
  }
  const double scale = std::max(norm(analytic), norm(numeric));
  if (scale == 0.0) return 0.0;
  return std::sqrt(diff) / scale;
}

}  // namespace mmd
