#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mmd/catalog.hpp"
#include "mmd/matrix.hpp"

namespace mmd {

inline constexpr std::size_t kImageDim = 4096;
inline constexpr std::size_t kTextDim = 300;
inline constexpr double kDefaultImageNoise = 0.3;

/// Unit-norm 300-d word vector seeded by a stable hash of the token.
Vector token_embedding(std::string_view token);
/// Unit-norm 4096-d visual basis for one (attribute, token) pair.
Vector image_basis(std::string_view attribute, std::string_view token);
/// Visual weight of an attribute in the synthetic image features.
double image_salience(std::string_view attribute);

/**
 * Deterministic stand-ins for pretrained encoders.
 *
 * Text: CBOW, the mean of per-token word vectors. Image: salience-weighted
 * sum of per-(attribute, token) bases plus per-product Gaussian noise whose
 * expected norm is `image_noise`. Basis vectors are cached on construction,
 * so an encoder is cheap to query and safe to share across threads.
 */
class FeatureEncoder {
 public:
  explicit FeatureEncoder(const Vocabulary& vocab, double image_noise = kDefaultImageNoise);

  /// Throws InvalidInput for an empty list and UnknownToken for out-of-vocabulary tokens.
  Vector encode_text(std::span<const std::string> tokens) const;
  Vector encode_image(const Product& product) const;

  double image_noise() const { return image_noise_; }
  std::uint64_t catalog_seed() const { return catalog_seed_; }

 private:
  double image_noise_;
  std::uint64_t catalog_seed_;
  std::unordered_map<std::string, Vector> words_;
  std::unordered_map<std::string, Vector> bases_;  // key: attribute + '\x1f' + token
};

Vector encode_text(std::span<const std::string> tokens, const Vocabulary& vocab);
Vector encode_image(const Product& product, std::uint64_t catalog_seed,
                    double image_noise = kDefaultImageNoise);

/// Raw encoder outputs for a whole catalog, rows in catalog order.
struct EncodedCatalog {
  std::vector<std::string> ids;
  Matrix image;  // n x 4096
  Matrix text;   // n x 300

  std::size_t size() const { return ids.size(); }
  friend bool operator==(const EncodedCatalog&, const EncodedCatalog&) = default;
};

EncodedCatalog encode_catalog(const Catalog& catalog, const FeatureEncoder& encoder);

/// Per-dimension z-scoring fitted on a catalog; zero-variance dimensions keep scale 1.
class Standardizer {
 public:
  Standardizer() = default;
  static Standardizer fit(const Matrix& rows);

  Vector apply(std::span<const double> v) const;
  Matrix apply(const Matrix& rows) const;
  std::size_t dim() const { return mean_.size(); }

 private:
  Vector mean_;
  Vector inv_scale_;
};

/// Binary feature file: "MMDENC1", then per product a u32 id length, the id
/// bytes, 4096 and 300 little-endian f64 values.
void save_features(const EncodedCatalog& encoded, const std::filesystem::path& path);
EncodedCatalog load_features(const std::filesystem::path& path);

}  // namespace mmd
