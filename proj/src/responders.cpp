#include "mmd/responders.hpp"

#include <algorithm>
#include <cmath>

#include "mmd/error.hpp"
#include "mmd/kernels.hpp"

namespace mmd {

ImageSpace::ImageSpace(std::vector<std::string> ids, Matrix features)
    : ids_(std::move(ids)), features_(std::move(features)) {
  if (ids_.size() != features_.rows()) {
    fail(ErrorKind::Shape, "ImageSpace: id count does not match feature rows");
  }
  for (std::size_t i = 0; i < ids_.size(); ++i) index_.emplace(ids_[i], i);
  dendrogram_ = average_linkage(features_);
}

std::size_t ImageSpace::index_of(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) fail(ErrorKind::NotFound, "unknown product '" + id + "'");
  return it->second;
}

double ImageSpace::distance(std::size_t a, std::size_t b) const {
  double acc = 0.0;
  const auto ra = features_.row(a);
  const auto rb = features_.row(b);
  for (std::size_t c = 0; c < ra.size(); ++c) {
    const double d = ra[c] - rb[c];
    acc += d * d;
  }
  return std::sqrt(acc);
}

std::vector<std::pair<std::size_t, double>> ImageSpace::neighbours(std::size_t query) const {
  std::vector<double> sq(size());
  kernels::squared_distances(features_, features_.row(query), sq);
  std::vector<std::pair<std::size_t, double>> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) {
    if (i != query) out.emplace_back(i, std::sqrt(sq[i]));
  }
  std::sort(out.begin(), out.end(), [this](const auto& a, const auto& b) {
    return a.second != b.second ? a.second < b.second : ids_[a.first] < ids_[b.first];
  });
  return out;
}

KnnResult knn(const ImageSpace& space, const std::string& query_id, std::size_t n) {
  if (n == 0) fail(ErrorKind::InvalidInput, "knn: n must be >= 1");
  const auto order = space.neighbours(space.index_of(query_id));
  KnnResult r;
  r.truncated = n > order.size();
  const std::size_t take = std::min(n, order.size());
  for (std::size_t i = 0; i < take; ++i) {
    r.ids.push_back(space.ids()[order[i].first]);
    r.distances.push_back(order[i].second);
  }
  return r;
}

namespace {

double cut_threshold(const ImageSpace& space, std::size_t clicked,
                     const std::vector<std::string>& knn_ids, double multiplier) {
  double reach = 0.0;
  for (const auto& id : knn_ids) reach = std::max(reach, space.distance(clicked, space.index_of(id)));
  return multiplier * reach;
}

std::vector<std::string> cluster_candidates(const ImageSpace& space, std::size_t clicked,
                                            const std::vector<std::string>& knn_ids,
                                            double threshold) {
  std::vector<std::string> out;
  for (std::size_t m : space.dendrogram().cluster_of(clicked, threshold)) {
    if (m == clicked) continue;
    const auto& id = space.ids()[m];
    if (std::find(knn_ids.begin(), knn_ids.end(), id) != knn_ids.end()) continue;
    out.push_back(id);
  }
  return out;
}

}  // namespace

std::vector<std::string> explore_cluster(const ImageSpace& space, const std::string& clicked_id,
                                         const std::vector<std::string>& knn_ids,
                                         double multiplier) {
  if (knn_ids.empty()) fail(ErrorKind::InvalidInput, "explore_cluster: empty KNN result");
  const std::size_t clicked = space.index_of(clicked_id);
  return cluster_candidates(space, clicked, knn_ids,
                            cut_threshold(space, clicked, knn_ids, multiplier));
}

std::vector<std::string> respond_text(const DialogContext& context, const AttributeIndex& index,
                                      std::size_t count) {
  const Constraints merged = context.merged();
  if (merged.empty()) fail(ErrorKind::InvalidInput, "respond_text: context has no constraints");
  auto ranked = index.rank_all(merged);
  if (ranked.size() > count) ranked.resize(count);
  return ranked;
}

std::size_t n1_min(std::size_t round, const FsaConfig& config) {
  return std::min(round + config.n1_offset, config.display_count);
}

ClickResponse respond_click(const ImageSpace& space, const AttributeIndex& index,
                            const std::string& clicked_id, std::size_t round,
                            const std::vector<std::string>& previous_display,
                            const std::set<std::string>& shown, const DialogContext& context,
                            const FsaConfig& config, SeededRng& rng) {
  if (std::find(previous_display.begin(), previous_display.end(), clicked_id) ==
      previous_display.end()) {
    fail(ErrorKind::Protocol, "clicked product '" + clicked_id + "' was not displayed");
  }
  const std::size_t display = config.display_count;
  const std::size_t lo = n1_min(round, config);
  ClickResponse resp;
  resp.n1 = lo + rng.index(display - lo + 1);
  resp.multiplier = rng.uniform(config.multiplier_lo, config.multiplier_hi);

  const std::size_t clicked = space.index_of(clicked_id);
  const auto order = space.neighbours(clicked);
  auto used = [&](const std::string& id) {
    return std::find(resp.ids.begin(), resp.ids.end(), id) != resp.ids.end();
  };

  // Exploit: nearest neighbours, unseen ones first.
  for (int pass = 0; pass < 2 && resp.ids.size() < resp.n1; ++pass) {
    for (const auto& [i, d] : order) {
      if (resp.ids.size() >= resp.n1) break;
      const auto& id = space.ids()[i];
      if ((pass == 0) == shown.contains(id) || used(id)) continue;
      resp.ids.push_back(id);
    }
  }
  resp.n1 = resp.ids.size();

  // Explore: uniform draws from the clicked product's cluster.
  if (resp.ids.size() < display && !resp.ids.empty()) {
    resp.threshold = cut_threshold(space, clicked, resp.ids, resp.multiplier);
    const auto candidates = cluster_candidates(space, clicked, resp.ids, resp.threshold);
    std::vector<std::string> fresh;
    std::vector<std::string> seen;
    for (const auto& id : candidates) (shown.contains(id) ? seen : fresh).push_back(id);
    for (auto* pool : {&fresh, &seen}) {
      // Partial Fisher-Yates.
      for (std::size_t k = 0; k < pool->size() && resp.ids.size() < display; ++k) {
        const std::size_t j = k + rng.index(pool->size() - k);
        std::swap((*pool)[k], (*pool)[j]);
        resp.ids.push_back((*pool)[k]);
        ++resp.explored;
      }
    }
  }

  // Shortfall: next-nearest neighbours, then the best context matches.
  for (const auto& [i, d] : order) {
    if (resp.ids.size() >= display) break;
    const auto& id = space.ids()[i];
    if (!used(id)) resp.ids.push_back(id);
  }
  if (resp.ids.size() < display) {
    const Constraints merged = context.merged();
    for (const auto& id : index.rank_all(merged)) {
      if (resp.ids.size() >= display) break;
      if (id != clicked_id && !used(id)) resp.ids.push_back(id);
    }
  }
  return resp;
}

}  // namespace mmd
