#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mmd/attribute_index.hpp"
#include "mmd/rng.hpp"
#include "mmd/vocabulary.hpp"

namespace mmd {

enum class FsaNode { Start, Gender, Category, GenderCategory, Attribute, ImageClick, End };

std::string_view to_string(FsaNode node);
FsaNode fsa_node_from_string(std::string_view name);
bool is_text_node(FsaNode node);

/// Browsing state a simulated user has expressed so far.
struct DialogContext {
  std::optional<std::string> gender;
  std::optional<std::string> category;
  /// Attribute constraints other than gender and category.
  Constraints constraints;

  /// Sets the category and drops constraints that do not apply to it.
  void set_category(const std::string& category, const Vocabulary& vocab);
  /// Gender, category and constraints as one search constraint map.
  Constraints merged() const;
  bool empty() const { return !gender && !category && constraints.empty(); }

  nlohmann::json to_json() const;
  static DialogContext from_json(const nlohmann::json& j);

  friend bool operator==(const DialogContext&, const DialogContext&) = default;
};

struct FsaConfig {
  std::map<FsaNode, std::map<FsaNode, double>> transitions;
  /// Probability that a text query (after round 0) switches gender and category.
  double p_context_switch = 0.1;
  /// Probability of ending after an attribute or image-click round.
  double p_end = 0.25;
  std::size_t max_rounds = 12;
  /// n1 is uniform over {min(r + n1_offset, display_count), ..., display_count}.
  std::size_t n1_offset = 1;
  std::size_t display_count = 6;
  double multiplier_lo = 2.0;
  double multiplier_hi = 5.0;

  static FsaConfig defaults();
  /// Throws Config if a row does not sum to 1 (within 1e-9) or a bound is violated.
  void validate() const;

  nlohmann::json to_json() const;
  /// Missing keys keep their default values.
  static FsaConfig from_json(const nlohmann::json& j);
};

FsaConfig load_fsa_config(const std::string& path);

/**
 * Next automaton node. From attribute and image-click nodes the walk ends
 * with probability p_end; otherwise the configured row is sampled. A jump
 * into the attribute node without a category in context is redirected to the
 * category or image-click node, in proportion to their configured weights.
 */
FsaNode step_fsa(FsaNode node, const DialogContext& context, const FsaConfig& config,
                 SeededRng& rng);

enum class QueryKind { Text, ImageClick };

struct QueryEvent {
  QueryKind kind = QueryKind::Text;
  std::vector<std::string> tokens;
  std::string clicked_id;
  std::size_t round = 0;
  bool context_switch = false;

  nlohmann::json to_json() const;
  static QueryEvent from_json(const nlohmann::json& j);

  friend bool operator==(const QueryEvent&, const QueryEvent&) = default;
};

/// Samples a text query for `node` and applies it to `context`.
QueryEvent gen_text_query(FsaNode node, DialogContext& context, const Vocabulary& vocab,
                          const FsaConfig& config, SeededRng& rng, std::size_t round);

/**
 * Applies a typed query to a context the way the simulator does: gender and
 * category tokens replace the current ones (a category change drops stale
 * constraints); attribute values become constraints. Throws UnknownToken.
 */
void apply_text_query(DialogContext& context, const std::vector<std::string>& tokens,
                      const Vocabulary& vocab);

}  // namespace mmd
