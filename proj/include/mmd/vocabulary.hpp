#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "mmd/rng.hpp"

namespace mmd {

namespace attr {
inline const std::string kGender = "gender";
inline const std::string kCategory = "category";
inline const std::string kColor = "color";
inline const std::string kMaterial = "material";
inline const std::string kPattern = "pattern";
inline const std::string kBrand = "brand";
}  // namespace attr

/// Token counts per attribute. Every count must be >= 1.
struct VocabularyConfig {
  std::size_t categories = 12;
  std::size_t colors = 8;
  std::size_t materials = 6;
  std::size_t patterns = 4;
  std::size_t brands = 10;
  /// Category-specific attributes beyond the six common ones.
  std::size_t extra_attributes = 4;
  /// Values shared out across the extra attributes (earlier ones get the remainder).
  std::size_t extra_values = 12;
  bool footwear_only = false;

  /// 130 categories, 17 attribute types, 501 attribute values.
  static VocabularyConfig full_scale();
  static VocabularyConfig desk_scale() { return {}; }
  static VocabularyConfig from_json(const nlohmann::json& j);
};

class Vocabulary {
 public:
  Vocabulary() = default;

  /// Throws Config if a count is zero or tokens collide.
  static Vocabulary build(const VocabularyConfig& config, SeededRng rng);

  const std::vector<std::string>& attributes() const { return attributes_; }
  const std::vector<std::string>& values(const std::string& attribute) const;
  const std::vector<std::string>& categories() const { return values(attr::kCategory); }
  const std::vector<std::string>& genders() const { return values(attr::kGender); }

  /// Attributes valid for `category`, in vocabulary order (includes gender and category).
  const std::vector<std::string>& applicable(const std::string& category) const;
  bool is_applicable(const std::string& category, const std::string& attribute) const;

  bool has_attribute(const std::string& attribute) const;
  bool has_value(const std::string& attribute, const std::string& token) const;
  /// Attribute owning a value token, nullopt for attribute names and unknown strings.
  std::optional<std::string> attribute_of(const std::string& token) const;
  bool contains(const std::string& token) const;

  /// Distinct strings: attribute names + categories + attribute values.
  std::size_t token_count() const { return token_owner_.size(); }
  std::vector<std::string> all_tokens() const;

  /// Seed that drives per-product image noise for catalogs built on this vocabulary.
  std::uint64_t catalog_seed() const { return catalog_seed_; }
  void set_catalog_seed(std::uint64_t seed) { catalog_seed_ = seed; }

  nlohmann::json to_json() const;
  static Vocabulary from_json(const nlohmann::json& j);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.attributes_ == b.attributes_ && a.values_ == b.values_ &&
           a.applicability_ == b.applicability_ && a.catalog_seed_ == b.catalog_seed_;
  }

 private:
  void index_tokens();

  std::vector<std::string> attributes_;
  std::map<std::string, std::vector<std::string>> values_;
  std::map<std::string, std::vector<std::string>> applicability_;
  // token -> owning attribute ("" for attribute-name tokens)
  std::map<std::string, std::string> token_owner_;
  std::uint64_t catalog_seed_ = 0;
};

}  // namespace mmd
