#include "mmd/encoders.hpp"

#include <cmath>
#include <cstdint>

#include "mmd/error.hpp"
#include "mmd/numerics.hpp"
#include "mmd/rng.hpp"

namespace mmd {

namespace {

Vector unit_gaussian(std::uint64_t seed, std::size_t dim) {
  SeededRng rng(seed, streams::kEncoder);
  Vector v(dim);
  for (double& x : v) x = rng.normal();
  const double n = norm(v);
  for (double& x : v) x /= n;
  return v;
}

std::string basis_key(std::string_view attribute, std::string_view token) {
  std::string key(attribute);
  key += '\x1f';
  key += token;
  return key;
}

void add_noise(Vector& v, const std::string& product_id, std::uint64_t catalog_seed,
               double image_noise) {
  if (image_noise <= 0.0) return;
  SeededRng rng(catalog_seed, stable_hash(product_id));
  const double scale = image_noise / std::sqrt(static_cast<double>(v.size()));
  for (double& x : v) x += scale * rng.normal();
}

}  // namespace

Vector token_embedding(std::string_view token) {
  return unit_gaussian(stable_hash(std::string("w2v:") + std::string(token)), kTextDim);
}

Vector image_basis(std::string_view attribute, std::string_view token) {
  return unit_gaussian(stable_hash("fc7:" + basis_key(attribute, token)), kImageDim);
}

double image_salience(std::string_view attribute) {
  // Silhouette dominates a product photo; brand and fine details barely show.
  if (attribute == attr::kCategory) return 3.0;
  if (attribute == attr::kColor) return 1.5;
  if (attribute == attr::kGender || attribute == attr::kMaterial || attribute == attr::kPattern) {
    return 1.0;
  }
  return 0.5;
}

FeatureEncoder::FeatureEncoder(const Vocabulary& vocab, double image_noise)
    : image_noise_(image_noise), catalog_seed_(vocab.catalog_seed()) {
  for (const auto& token : vocab.all_tokens()) words_.emplace(token, token_embedding(token));
  for (const auto& a : vocab.attributes()) {
    for (const auto& t : vocab.values(a)) bases_.emplace(basis_key(a, t), image_basis(a, t));
  }
}

Vector FeatureEncoder::encode_text(std::span<const std::string> tokens) const {
  if (tokens.empty()) fail(ErrorKind::InvalidInput, "encode_text: empty token list");
  Vector out(kTextDim, 0.0);
  for (const auto& t : tokens) {
    auto it = words_.find(t);
    if (it == words_.end()) fail(ErrorKind::UnknownToken, "unknown token '" + t + "'");
    for (std::size_t i = 0; i < kTextDim; ++i) out[i] += it->second[i];
  }
  const double inv = 1.0 / static_cast<double>(tokens.size());
  for (double& x : out) x *= inv;
  return out;
}

Vector FeatureEncoder::encode_image(const Product& product) const {
  Vector out(kImageDim, 0.0);
  for (const auto& [a, t] : product.attribute_pairs()) {
    auto it = bases_.find(basis_key(a, t));
    if (it == bases_.end()) {
      fail(ErrorKind::UnknownToken, "product " + product.id + ": unknown token '" + t + "'");
    }
    const double w = image_salience(a);
    for (std::size_t i = 0; i < kImageDim; ++i) out[i] += w * it->second[i];
  }
  add_noise(out, product.id, catalog_seed_, image_noise_);
  return out;
}

Vector encode_text(std::span<const std::string> tokens, const Vocabulary& vocab) {
  if (tokens.empty()) fail(ErrorKind::InvalidInput, "encode_text: empty token list");
  Vector out(kTextDim, 0.0);
  for (const auto& t : tokens) {
    if (!vocab.contains(t)) fail(ErrorKind::UnknownToken, "unknown token '" + t + "'");
    const Vector e = token_embedding(t);
    for (std::size_t i = 0; i < kTextDim; ++i) out[i] += e[i];
  }
  const double inv = 1.0 / static_cast<double>(tokens.size());
  for (double& x : out) x *= inv;
  return out;
}

Vector encode_image(const Product& product, std::uint64_t catalog_seed, double image_noise) {
  Vector out(kImageDim, 0.0);
  for (const auto& [a, t] : product.attribute_pairs()) {
    const Vector b = image_basis(a, t);
    const double w = image_salience(a);
    for (std::size_t i = 0; i < kImageDim; ++i) out[i] += w * b[i];
  }
  add_noise(out, product.id, catalog_seed, image_noise);
  return out;
}

EncodedCatalog encode_catalog(const Catalog& catalog, const FeatureEncoder& encoder) {
  const std::size_t n = catalog.size();
  EncodedCatalog out{{}, Matrix(n, kImageDim), Matrix(n, kTextDim)};
  out.ids.reserve(n);
  for (const auto& p : catalog.products()) out.ids.push_back(p.id);
  const auto rows = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t i = 0; i < rows; ++i) {
    const Product& p = catalog[static_cast<std::size_t>(i)];
    const Vector img = encoder.encode_image(p);
    const auto tokens = product_text_tokens(p);
    const Vector txt = encoder.encode_text(tokens);
    std::copy(img.begin(), img.end(), out.image.row(static_cast<std::size_t>(i)).begin());
    std::copy(txt.begin(), txt.end(), out.text.row(static_cast<std::size_t>(i)).begin());
  }
  return out;
}

Standardizer Standardizer::fit(const Matrix& rows) {
  Standardizer s;
  const std::size_t n = rows.rows();
  const std::size_t d = rows.cols();
  s.mean_.assign(d, 0.0);
  s.inv_scale_.assign(d, 1.0);
  if (n == 0) return s;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) s.mean_[c] += rows(r, c);
  }
  for (double& m : s.mean_) m /= static_cast<double>(n);
  Vector var(d, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      const double dev = rows(r, c) - s.mean_[c];
      var[c] += dev * dev;
    }
  }
  for (std::size_t c = 0; c < d; ++c) {
    const double sd = std::sqrt(var[c] / static_cast<double>(n));
    s.inv_scale_[c] = sd > 1e-12 ? 1.0 / sd : 1.0;
  }
  return s;
}

Vector Standardizer::apply(std::span<const double> v) const {
  if (v.size() != mean_.size()) fail(ErrorKind::Shape, "Standardizer: dimension mismatch");
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - mean_[i]) * inv_scale_[i];
  return out;
}

Matrix Standardizer::apply(const Matrix& rows) const {
  if (rows.cols() != mean_.size()) fail(ErrorKind::Shape, "Standardizer: dimension mismatch");
  Matrix out(rows.rows(), rows.cols());
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    for (std::size_t c = 0; c < rows.cols(); ++c) {
      out(r, c) = (rows(r, c) - mean_[c]) * inv_scale_[c];
    }
  }
  return out;
}

}  // namespace mmd
