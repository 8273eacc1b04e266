#include "mmd/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mmd {

bool all_finite(std::span<const double> v) noexcept {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

void require_finite(std::span<const double> v, const char* what) {
  if (!all_finite(v)) fail(ErrorKind::InvalidInput, std::string(what) + ": non-finite entry");
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(ErrorKind::Shape, "dot: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Vector sigmoid(std::span<const double> x) {
  require_finite(x, "sigmoid");
  Vector out(x.size());
  std::transform(x.begin(), x.end(), out.begin(), [](double v) { return sigmoid(v); });
  return out;
}

Vector softmax(std::span<const double> logits) {
  if (logits.empty()) fail(ErrorKind::InvalidInput, "softmax: empty input");
  require_finite(logits, "softmax");
  const double top = *std::max_element(logits.begin(), logits.end());
  Vector out(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - top);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(ErrorKind::Shape, "cosine_similarity: length mismatch");
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) {
    fail(ErrorKind::DegenerateInput, "cosine_similarity: zero-norm vector");
  }
  return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

double gumbel_from_uniform(double u) noexcept {
  u = std::clamp(u, kProbabilityFloor, 1.0 - kProbabilityFloor);
  return -std::log(-std::log(u));
}

double gumbel_noise(SeededRng& rng) noexcept { return gumbel_from_uniform(rng.uniform_open()); }

Vector mean_of(std::span<const Vector> vectors) {
  if (vectors.empty()) fail(ErrorKind::InvalidInput, "mean_of: no vectors");
  Vector out(vectors.front().size(), 0.0);
  for (const Vector& v : vectors) {
    if (v.size() != out.size()) fail(ErrorKind::Shape, "mean_of: length mismatch");
    for (std::size_t i = 0; i < v.size(); ++i) out[i] += v[i];
  }
  const double inv = 1.0 / static_cast<double>(vectors.size());
  for (double& x : out) x *= inv;
  return out;
}

}  // namespace mmd
