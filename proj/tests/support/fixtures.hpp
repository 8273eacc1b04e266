#pragma once

#include <filesystem>
#include <memory>
#include <random>
#include <string>

#include "mmd/attribute_index.hpp"
#include "mmd/catalog.hpp"
#include "mmd/encoders.hpp"
#include "mmd/responders.hpp"
#include "mmd/simulator.hpp"
#include "mmd/vocabulary.hpp"

namespace fixtures {

/// Desk-scale vocabulary, catalog, features and search structures.
struct World {
  mmd::Vocabulary vocab;
  mmd::Catalog catalog;
  mmd::EncodedCatalog encoded;
  std::unique_ptr<mmd::AttributeIndex> index;
  std::unique_ptr<mmd::ImageSpace> images;

  mmd::Storefront store() const { return {vocab, catalog, *index, *images}; }
};

inline World make_world(std::size_t products, std::uint64_t seed,
                        double image_noise = mmd::kDefaultImageNoise,
                        mmd::VocabularyConfig config = {}) {
  World w;
  w.vocab = mmd::Vocabulary::build(config, mmd::SeededRng(seed, mmd::streams::kVocabulary));
  w.vocab.set_catalog_seed(seed);
  w.catalog = mmd::generate_catalog(w.vocab, products, mmd::SeededRng(seed, mmd::streams::kCatalog));
  w.encoded = mmd::encode_catalog(w.catalog, mmd::FeatureEncoder(w.vocab, image_noise));
  w.index = std::make_unique<mmd::AttributeIndex>(w.catalog);
  w.images = std::make_unique<mmd::ImageSpace>(w.encoded.ids, w.encoded.image);
  return w;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("mmd-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline mmd::Matrix random_matrix(std::size_t rows, std::size_t cols, mmd::SeededRng& rng,
                                 double scale = 1.0) {
  mmd::Matrix m(rows, cols);
  for (double& v : m.values()) v = scale * rng.normal();
  return m;
}

inline mmd::Vector random_vector(std::size_t n, mmd::SeededRng& rng, double scale = 1.0) {
  mmd::Vector v(n);
  for (double& x : v) x = scale * rng.normal();
  return v;
}

}  // namespace fixtures
