#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mmd/catalog.hpp"

namespace mmd {

using Constraints = std::map<std::string, std::string>;

/// In-memory inverted index over (attribute, token) pairs.
class AttributeIndex {
 public:
  AttributeIndex() = default;
  explicit AttributeIndex(const Catalog& catalog);

  /// Sorted product ids carrying `token` under `attribute`; empty if none.
  const std::vector<std::string>& postings(const std::string& attribute,
                                           const std::string& token) const;

  /**
   * Products satisfying at least one constraint, ranked by number of
   * satisfied constraints (descending) then id (ascending), truncated to
   * `limit`. Throws InvalidInput for empty constraints or limit == 0.
   */
  std::vector<std::string> search(const Constraints& constraints, std::size_t limit) const;

  /// Like search() but without the >=1-match filter: every product, ranked.
  std::vector<std::string> rank_all(const Constraints& constraints) const;

  std::size_t product_count() const { return ids_.size(); }

 private:
  std::vector<std::pair<std::string, std::size_t>> scored(const Constraints& constraints) const;

  std::vector<std::string> ids_;  // sorted
  std::map<std::pair<std::string, std::string>, std::vector<std::string>> postings_;
};

std::vector<std::string> search(const AttributeIndex& index, const Constraints& constraints,
                                std::size_t limit);

}  // namespace mmd
