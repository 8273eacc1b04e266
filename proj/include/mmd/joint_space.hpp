#pragma once

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mmd/catalog.hpp"
#include "mmd/corrnet.hpp"
#include "mmd/encoders.hpp"

namespace mmd {

/// Standardised two-view data plus the scalers fitted to produce it.
struct StandardizedViews {
  TwoViewData data;
  Standardizer image;
  Standardizer text;
};

StandardizedViews standardize_views(const EncodedCatalog& encoded);

/**
 * A trained CorrNet bound to one catalog: queries are encoded, standardised
 * with the catalog's scalers and projected; every product's image-view
 * projection is precomputed.
 */
class JointSpace {
 public:
  JointSpace(const Vocabulary& vocab, const EncodedCatalog& encoded, CorrNetParams params);

  std::size_t k() const { return params_.k(); }
  const CorrNetParams& params() const { return params_; }
  const std::vector<std::string>& ids() const { return ids_; }
  /// Image-view projections, one row per product in catalog order.
  const Matrix& image_projections() const { return images_; }

  /// Throws UnknownToken / InvalidInput as encode_text does.
  Vector project_text(std::span<const std::string> tokens) const;
  /// Throws NotFound for an unknown product id.
  Vector image_projection(const std::string& product_id) const;
  std::size_t row_of(const std::string& product_id) const;

  /// The n products whose image projection is closest in cosine to the text projection.
  std::vector<std::string> cross_modal_neighbors(std::span<const std::string> tokens,
                                                 std::size_t n) const;

 private:
  CorrNetParams params_;
  FeatureEncoder encoder_;
  Standardizer text_scaler_;
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> rows_;
  Matrix images_;
};

}  // namespace mmd
