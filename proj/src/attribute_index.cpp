#include "mmd/attribute_index.hpp"

#include <algorithm>
#include <unordered_map>

#include "mmd/error.hpp"

namespace mmd {

AttributeIndex::AttributeIndex(const Catalog& catalog) {
  for (const auto& p : catalog.products()) {
    ids_.push_back(p.id);
    for (const auto& pair : p.attribute_pairs()) postings_[pair].push_back(p.id);
  }
  std::sort(ids_.begin(), ids_.end());
  for (auto& [key, list] : postings_) std::sort(list.begin(), list.end());
}

const std::vector<std::string>& AttributeIndex::postings(const std::string& attribute,
                                                         const std::string& token) const {
  static const std::vector<std::string> kEmpty;
  auto it = postings_.find({attribute, token});
  return it == postings_.end() ? kEmpty : it->second;
}

std::vector<std::pair<std::string, std::size_t>> AttributeIndex::scored(
    const Constraints& constraints) const {
  std::unordered_map<std::string, std::size_t> hits;
  for (const auto& c : constraints) {
    for (const auto& id : postings(c.first, c.second)) ++hits[id];
  }
  std::vector<std::pair<std::string, std::size_t>> out(hits.begin(), hits.end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  return out;
}

std::vector<std::string> AttributeIndex::search(const Constraints& constraints,
                                                std::size_t limit) const {
  if (constraints.empty()) fail(ErrorKind::InvalidInput, "search: empty constraints");
  if (limit == 0) fail(ErrorKind::InvalidInput, "search: limit must be >= 1");
  auto ranked = scored(constraints);
  if (ranked.size() > limit) ranked.resize(limit);
  std::vector<std::string> out;
  out.reserve(ranked.size());
  for (auto& r : ranked) out.push_back(std::move(r.first));
  return out;
}

std::vector<std::string> AttributeIndex::rank_all(const Constraints& constraints) const {
  auto ranked = scored(constraints);
  std::vector<std::string> out;
  out.reserve(ids_.size());
  for (auto& r : ranked) out.push_back(std::move(r.first));
  // Zero-match products follow in id order.
  std::vector<std::string> matched = out;
  std::sort(matched.begin(), matched.end());
  for (const auto& id : ids_) {
    if (!std::binary_search(matched.begin(), matched.end(), id)) out.push_back(id);
  }
  return out;
}

std::vector<std::string> search(const AttributeIndex& index, const Constraints& constraints,
                                std::size_t limit) {
  return index.search(constraints, limit);
}

}  // namespace mmd
