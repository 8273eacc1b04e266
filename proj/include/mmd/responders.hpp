#pragma once

#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "mmd/attribute_index.hpp"
#include "mmd/clustering.hpp"
#include "mmd/fsa.hpp"
#include "mmd/matrix.hpp"
#include "mmd/rng.hpp"

namespace mmd {

/// Image-feature view of a catalog used by the click responder: features,
/// id lookup and the average-linkage hierarchy over all products.
class ImageSpace {
 public:
  ImageSpace(std::vector<std::string> ids, Matrix features);

  const std::vector<std::string>& ids() const { return ids_; }
  const Matrix& features() const { return features_; }
  const Dendrogram& dendrogram() const { return dendrogram_; }
  std::size_t size() const { return ids_.size(); }
  /// Throws NotFound.
  std::size_t index_of(const std::string& id) const;

  /// Every other product ordered by (Euclidean distance, id).
  std::vector<std::pair<std::size_t, double>> neighbours(std::size_t query) const;
  double distance(std::size_t a, std::size_t b) const;

 private:
  std::vector<std::string> ids_;
  Matrix features_;
  std::unordered_map<std::string, std::size_t> index_;
  Dendrogram dendrogram_;
};

struct KnnResult {
  std::vector<std::string> ids;
  std::vector<double> distances;
  /// Set when fewer than the requested neighbours exist.
  bool truncated = false;
};

/// n nearest products to `query_id` by Euclidean distance, excluding the query.
KnnResult knn(const ImageSpace& space, const std::string& query_id, std::size_t n);

/**
 * Exploration candidates for a click: members of the clicked product's
 * average-linkage cluster when the tree is cut at
 * multiplier x (largest distance from the clicked product to a KNN result),
 * minus the clicked product and the KNN results. Catalog order.
 */
std::vector<std::string> explore_cluster(const ImageSpace& space, const std::string& clicked_id,
                                         const std::vector<std::string>& knn_ids,
                                         double multiplier);

/// Top `count` products for the merged context, padded with the globally
/// best-matching remainder when fewer products match.
std::vector<std::string> respond_text(const DialogContext& context, const AttributeIndex& index,
                                      std::size_t count = 6);

struct ClickResponse {
  std::vector<std::string> ids;
  std::size_t n1 = 0;
  double multiplier = 0.0;
  double threshold = 0.0;
  /// ids[0..n1) come from nearest neighbours, the next explored ones from the cluster;
  /// anything after that is shortfall padding.
  std::size_t explored = 0;
};

/// Lower end of the n1 support at click round r (r >= 1).
std::size_t n1_min(std::size_t round, const FsaConfig& config);

/**
 * Exploration-exploitation response to a click in round `round`.
 *
 * n1 ~ uniform{min(r + offset, N_d), ..., N_d}; the first n1 results are the
 * nearest neighbours of the clicked product, the remaining N_d - n1 are drawn
 * without replacement from explore_cluster() with a multiplier uniform in the
 * configured range. Products in `shown` are skipped while alternatives exist.
 * Throws Protocol if `clicked_id` is not in `previous_display`.
 */
ClickResponse respond_click(const ImageSpace& space, const AttributeIndex& index,
                            const std::string& clicked_id, std::size_t round,
                            const std::vector<std::string>& previous_display,
                            const std::set<std::string>& shown, const DialogContext& context,
                            const FsaConfig& config, SeededRng& rng);

}  // namespace mmd
