#include "mmd/joint_space.hpp"

#include "mmd/error.hpp"

namespace mmd {

StandardizedViews standardize_views(const EncodedCatalog& encoded) {
  StandardizedViews out;
  out.image = Standardizer::fit(encoded.image);
  out.text = Standardizer::fit(encoded.text);
  out.data.image = out.image.apply(encoded.image);
  out.data.text = out.text.apply(encoded.text);
  return out;
}

JointSpace::JointSpace(const Vocabulary& vocab, const EncodedCatalog& encoded, CorrNetParams params)
    : params_(std::move(params)), encoder_(vocab), ids_(encoded.ids) {
  params_.check_shapes();
  if (encoded.size() == 0) fail(ErrorKind::InvalidInput, "JointSpace: empty catalog");
  if (params_.image_dim() != encoded.image.cols() || params_.text_dim() != encoded.text.cols()) {
    fail(ErrorKind::Shape, "JointSpace: CorrNet dimensions do not match the features");
  }
  const Standardizer image_scaler = Standardizer::fit(encoded.image);
  text_scaler_ = Standardizer::fit(encoded.text);
  images_ = project_images(params_, image_scaler.apply(encoded.image));
  for (std::size_t i = 0; i < ids_.size(); ++i) rows_.emplace(ids_[i], i);
}

Vector JointSpace::project_text(std::span<const std::string> tokens) const {
  const Vector scaled = text_scaler_.apply(encoder_.encode_text(tokens));
  return project(params_, std::nullopt, std::span<const double>(scaled));
}

std::size_t JointSpace::row_of(const std::string& product_id) const {
  const auto it = rows_.find(product_id);
  if (it == rows_.end()) fail(ErrorKind::NotFound, "unknown product id: " + product_id);
  return it->second;
}

Vector JointSpace::image_projection(const std::string& product_id) const {
  const auto row = images_.row(row_of(product_id));
  return {row.begin(), row.end()};
}

std::vector<std::string> JointSpace::cross_modal_neighbors(std::span<const std::string> tokens,
                                                           std::size_t n) const {
  if (n == 0) fail(ErrorKind::InvalidInput, "cross_modal_neighbors: n must be >= 1");
  const auto ranked = rank_by_cosine(project_text(tokens), images_);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < ranked.size() && i < n; ++i) out.push_back(ids_[ranked[i]]);
  return out;
}

}  // namespace mmd
