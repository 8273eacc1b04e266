#pragma once

#include <cstddef>
#include <vector>

#include "mmd/matrix.hpp"

namespace mmd {

/// One agglomeration step. Cluster ids follow the usual convention: leaves
/// are 0..n-1, the cluster formed by merge i is n+i.
struct Merge {
  std::size_t left;
  std::size_t right;
  double height;
  std::size_t size;
};

/// Average-linkage hierarchy over Euclidean distances.
class Dendrogram {
 public:
  Dendrogram() = default;
  Dendrogram(std::size_t leaves, std::vector<Merge> merges);

  std::size_t leaves() const { return leaves_; }
  const std::vector<Merge>& merges() const { return merges_; }

  /// Leaves sharing a flat cluster with `leaf` when the tree is cut at
  /// `threshold` (merges with height <= threshold are kept). Includes `leaf`,
  /// ascending order.
  std::vector<std::size_t> cluster_of(std::size_t leaf, double threshold) const;

  /// Flat labels for every leaf after the cut; labels are the smallest leaf index in each cluster.
  std::vector<std::size_t> cut(double threshold) const;

 private:
  std::size_t leaves_ = 0;
  std::vector<Merge> merges_;
  std::vector<std::size_t> representative_;  // a leaf inside each merged cluster
};

/// Nearest-neighbour-chain agglomeration, O(n^2) time and memory.
Dendrogram average_linkage(const Matrix& points);

/// Same, from a condensed matrix of (non-squared) distances.
Dendrogram average_linkage_from_distances(std::size_t n, std::vector<double> condensed);

}  // namespace mmd
