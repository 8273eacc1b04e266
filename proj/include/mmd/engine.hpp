#pragma once

#include <chrono>
#include <functional>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "mmd/agent.hpp"
#include "mmd/attribute_index.hpp"
#include "mmd/catalog.hpp"
#include "mmd/joint_space.hpp"
#include "mmd/responders.hpp"
#include "mmd/simulator.hpp"

namespace mmd {

enum class ResponderMode { Rules, Agent, Random };

std::string_view to_string(ResponderMode mode);
/// Throws InvalidInput for anything but "rules", "agent" or "random".
ResponderMode responder_mode_from_string(std::string_view name);

/// Everything loaded from disk before serving.
struct EngineAssets {
  Vocabulary vocab;
  Catalog catalog;
  EncodedCatalog encoded;
  CorrNetParams corrnet;
  std::optional<std::pair<AgentParams, AgentHyper>> agent;
};

struct EngineConfig {
  std::uint64_t seed = 1;
  FsaConfig fsa = FsaConfig::defaults();
  std::size_t capacity = 10000;
  std::chrono::seconds idle_timeout{3600};
  std::function<std::chrono::steady_clock::time_point()> clock = std::chrono::steady_clock::now;
};

/// Immutable data shared by all sessions.
class EngineState {
 public:
  explicit EngineState(EngineAssets assets);

  const Vocabulary& vocab() const { return vocab_; }
  const Catalog& catalog() const { return catalog_; }
  const AttributeIndex& index() const { return index_; }
  const ImageSpace& images() const { return images_; }
  const JointSpace& joint() const { return joint_; }
  bool has_agent() const { return agent_.has_value(); }
  const AgentParams& agent_params() const { return agent_->first; }
  const AgentHyper& agent_hyper() const { return agent_->second; }
  Storefront storefront() const { return {vocab_, catalog_, index_, images_}; }

 private:
  Vocabulary vocab_;
  Catalog catalog_;
  AttributeIndex index_;
  ImageSpace images_;
  JointSpace joint_;
  std::optional<std::pair<AgentParams, AgentHyper>> agent_;
};

struct LiveSession {
  std::string id;
  ResponderMode mode = ResponderMode::Rules;
  std::vector<DialogRound> rounds;
  DialogContext context;
  SeededRng rng{0};
  std::set<std::string> shown;
  /// Joint-space projections of every query so far (agent mode).
  std::vector<Vector> projections;
  std::mutex mutex;
};

/**
 * Interactive browsing sessions over one EngineState. The session table is
 * guarded by one mutex; each session has its own, so requests to different
 * sessions run concurrently and requests to one session are serialised.
 * Sessions idle longer than the timeout are dropped, and the least recently
 * used one is evicted when the table is full.
 */
class Engine {
 public:
  Engine(std::shared_ptr<const EngineState> state, EngineConfig config);

  const EngineState& state() const { return *state_; }

  /// Throws Conflict for agent mode without agent parameters.
  std::string create_session(ResponderMode mode);
  /// Throws NotFound, UnknownToken, InvalidInput.
  DialogRound post_text_query(const std::string& session, const std::vector<std::string>& tokens);
  /// Throws NotFound, Protocol when the product is not in the latest display.
  DialogRound post_click(const std::string& session, const std::string& product_id);
  std::vector<DialogRound> history(const std::string& session);
  ResponderMode mode_of(const std::string& session);
  std::size_t session_count() const;

 private:
  std::shared_ptr<LiveSession> find(const std::string& session);
  void evict_locked(std::chrono::steady_clock::time_point now);
  std::vector<std::string> random_display(LiveSession& s) const;
  std::vector<std::string> agent_display(LiveSession& s) const;

  struct Slot {
    std::shared_ptr<LiveSession> session;
    std::list<std::string>::iterator lru;
    std::chrono::steady_clock::time_point last_used;
  };

  std::shared_ptr<const EngineState> state_;
  EngineConfig config_;
  mutable std::mutex table_mutex_;
  std::unordered_map<std::string, Slot> table_;
  std::list<std::string> lru_;  // most recent first
  std::uint64_t next_ordinal_ = 1;
};

/// Wire form of a round: the stored fields plus the round index and image URLs.
nlohmann::json round_to_api_json(const DialogRound& round, std::size_t index);

}  // namespace mmd
