#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "mmd/rng.hpp"
#include "mmd/vocabulary.hpp"

namespace mmd {

struct Product {
  std::string id;
  std::string gender;
  std::string category;
  /// Applicable attributes other than gender and category.
  std::map<std::string, std::string> attrs;

  /// All (attribute, token) pairs including gender and category.
  std::vector<std::pair<std::string, std::string>> attribute_pairs() const;
  std::optional<std::string> value_of(const std::string& attribute) const;

  friend bool operator==(const Product&, const Product&) = default;
};

/// Tokens forming the text view of a product: gender, category and color.
std::vector<std::string> product_text_tokens(const Product& p);

/// Throws Data if `p` violates the vocabulary (unknown or inapplicable values).
void validate_product(const Product& p, const Vocabulary& vocab);

/// Ordered product list with id lookup. Immutable once built.
class Catalog {
 public:
  Catalog() = default;
  explicit Catalog(std::vector<Product> products);

  const std::vector<Product>& products() const { return products_; }
  std::size_t size() const { return products_.size(); }
  bool empty() const { return products_.empty(); }
  const Product& operator[](std::size_t i) const { return products_[i]; }

  std::optional<std::size_t> index_of(const std::string& id) const;
  /// Throws NotFound.
  const Product& at(const std::string& id) const;
  bool contains(const std::string& id) const { return by_id_.contains(id); }

  friend bool operator==(const Catalog& a, const Catalog& b) { return a.products_ == b.products_; }

 private:
  std::vector<Product> products_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

std::string product_id(std::size_t ordinal);

/// n products with ids P000001.. sampled uniformly from the vocabulary,
/// respecting category applicability. Throws Config when n == 0.
Catalog generate_catalog(const Vocabulary& vocab, std::size_t n, SeededRng rng);

nlohmann::json product_to_json(const Product& p);
std::string catalog_to_jsonl(const Catalog& catalog);
void save_catalog(const Catalog& catalog, const std::filesystem::path& path);
/// Throws Parse naming the line number (and the attribute, for vocabulary violations).
Catalog parse_catalog_jsonl(std::istream& in, const Vocabulary& vocab);
Catalog load_catalog(const std::filesystem::path& path, const Vocabulary& vocab);

void save_vocabulary(const Vocabulary& vocab, const std::filesystem::path& path);
Vocabulary load_vocabulary(const std::filesystem::path& path);

/// Sidecar paths derived from a catalog path: cat.jsonl -> cat.vocab.json, cat.features.bin.
std::filesystem::path vocabulary_path_for(const std::filesystem::path& catalog);
std::filesystem::path features_path_for(const std::filesystem::path& catalog);

}  // namespace mmd
