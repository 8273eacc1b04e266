#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace mmd {

/// Well-known stream ids for the pipeline stages drawn from one master seed.
namespace streams {
inline constexpr std::uint64_t kVocabulary = 1;
inline constexpr std::uint64_t kCatalog = 2;
inline constexpr std::uint64_t kSimulator = 3;
inline constexpr std::uint64_t kCorrNet = 4;
inline constexpr std::uint64_t kAgent = 5;
inline constexpr std::uint64_t kEvaluation = 6;
inline constexpr std::uint64_t kService = 7;
inline constexpr std::uint64_t kEncoder = 8;
}  // namespace streams

std::uint64_t mix64(std::uint64_t x) noexcept;

/// FNV-1a over the bytes of `s`. Stable across platforms and runs.
std::uint64_t stable_hash(std::string_view s) noexcept;

/**
 * Counter-based generator: draw n of stream (seed, stream) is a pure function
 * of (seed, stream, n), so independent streams can be split off a master seed
 * and sequences are reproducible bit-for-bit. Normal and uniform transforms
 * are implemented here rather than through <random> distributions, whose
 * output is implementation-defined.
 */
class SeededRng {
 public:
  SeededRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_; }
  std::uint64_t position() const noexcept { return counter_; }

  /// Child generator on a stream derived from this one's stream and `id`.
  SeededRng split(std::uint64_t id) const noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform() noexcept;
  /// Uniform clamped into [1e-12, 1 - 1e-12]; safe for log transforms.
  double uniform_open() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  /// Unbiased integer in [0, n). n must be > 0.
  std::size_t index(std::size_t n) noexcept;
  double normal() noexcept;
  bool bernoulli(double p) noexcept { return uniform() < p; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::optional<double> spare_normal_;
};

}  // namespace mmd
