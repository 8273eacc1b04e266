#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mmd/attribute_index.hpp"
#include "mmd/catalog.hpp"
#include "mmd/fsa.hpp"
#include "mmd/responders.hpp"

namespace mmd {

struct DialogRound {
  QueryEvent query;
  std::vector<std::string> displayed;
  DialogContext context;
  std::optional<std::size_t> n1;

  nlohmann::json to_json() const;
  static DialogRound from_json(const nlohmann::json& j);
  friend bool operator==(const DialogRound&, const DialogRound&) = default;
};

struct DialogSession {
  std::string id;
  std::vector<DialogRound> rounds;

  nlohmann::json to_json() const;
  static DialogSession from_json(const nlohmann::json& j);
  friend bool operator==(const DialogSession&, const DialogSession&) = default;
};

/// Read-only view of everything the rule-based responders need.
struct Storefront {
  const Vocabulary& vocab;
  const Catalog& catalog;
  const AttributeIndex& index;
  const ImageSpace& images;
};

std::string session_id(std::size_t ordinal);

/// One random walk start -> ... -> end, capped at config.max_rounds rounds.
DialogSession generate_session(const Storefront& store, const FsaConfig& config,
                               const std::string& id, SeededRng rng);

/// n sessions S000001..; session i draws from rng.split(i), so the result
/// does not depend on how sessions are scheduled across threads.
std::vector<DialogSession> generate_dataset(const Storefront& store, const FsaConfig& config,
                                            std::size_t sessions, const SeededRng& rng);

/// Throws Data naming the first violated round invariant.
void validate_session(const DialogSession& session, const FsaConfig& config);

std::string sessions_to_jsonl(const std::vector<DialogSession>& sessions);
void save_sessions(const std::vector<DialogSession>& sessions, const std::filesystem::path& path);
std::vector<DialogSession> load_sessions(const std::filesystem::path& path);

}  // namespace mmd
