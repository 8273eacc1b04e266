#pragma once

#include <span>

#include "mmd/matrix.hpp"
#include "mmd/rng.hpp"

namespace mmd {

inline constexpr double kProbabilityFloor = 1e-12;

bool all_finite(std::span<const double> v) noexcept;
void require_finite(std::span<const double> v, const char* what);

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> v);

double sigmoid(double x) noexcept;
/// Elementwise logistic function. Throws InvalidInput on non-finite entries.
Vector sigmoid(std::span<const double> x);

/// Max-shifted softmax. Throws InvalidInput on an empty or non-finite input.
Vector softmax(std::span<const double> logits);

/// a.b / (|a||b|). Throws DegenerateInput if either vector has zero norm.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// Standard Gumbel draw -log(-log(u)) with u clamped to (1e-12, 1 - 1e-12).
double gumbel_from_uniform(double u) noexcept;
double gumbel_noise(SeededRng& rng) noexcept;

/// Elementwise mean of equally sized vectors.
Vector mean_of(std::span<const Vector> vectors);

}  // namespace mmd
