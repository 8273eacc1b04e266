#include "mmd/engine.hpp"

#include <algorithm>
#include <cstdio>

#include "mmd/error.hpp"

namespace mmd {

std::string_view to_string(ResponderMode mode) {
  switch (mode) {
    case ResponderMode::Rules: return "rules";
    case ResponderMode::Agent: return "agent";
    case ResponderMode::Random: return "random";
  }
  return "rules";
}

ResponderMode responder_mode_from_string(std::string_view name) {
  if (name == "rules") return ResponderMode::Rules;
  if (name == "agent") return ResponderMode::Agent;
  if (name == "random") return ResponderMode::Random;
  fail(ErrorKind::InvalidInput, "unknown responder mode '" + std::string(name) + "'");
}

EngineState::EngineState(EngineAssets assets)
    : vocab_(std::move(assets.vocab)),
      catalog_(std::move(assets.catalog)),
      index_(catalog_),
      images_(assets.encoded.ids, assets.encoded.image),
      joint_(vocab_, assets.encoded, std::move(assets.corrnet)),
      agent_(std::move(assets.agent)) {
  if (catalog_.size() != assets.encoded.size()) {
    fail(ErrorKind::Data, "catalog and feature file disagree on the product count");
  }
  for (std::size_t i = 0; i < catalog_.size(); ++i) {
    if (catalog_[i].id != assets.encoded.ids[i]) {
      fail(ErrorKind::Data, "feature file row " + std::to_string(i) + " is not " + catalog_[i].id);
    }
  }
  if (agent_) {
    agent_->first.check_shapes();
    if (agent_->first.k() != joint_.k()) {
      fail(ErrorKind::Data, "agent and CorrNet embedding sizes differ");
    }
  }
}

Engine::Engine(std::shared_ptr<const EngineState> state, EngineConfig config)
    : state_(std::move(state)), config_(std::move(config)) {
  config_.fsa.validate();
  if (config_.capacity == 0) fail(ErrorKind::Config, "session capacity must be >= 1");
}

std::string Engine::create_session(ResponderMode mode) {
  if (mode == ResponderMode::Agent && !state_->has_agent()) {
    fail(ErrorKind::Conflict, "agent mode requested but no agent model is loaded");
  }
  const auto now = config_.clock();
  std::lock_guard lock(table_mutex_);
  const std::uint64_t ordinal = next_ordinal_++;
  char buf[40];
  std::snprintf(buf, sizeof buf, "L%06llu-%08llx", static_cast<unsigned long long>(ordinal),
                static_cast<unsigned long long>(mix64(config_.seed ^ mix64(ordinal)) & 0xffffffffULL));
  auto session = std::make_shared<LiveSession>();
  session->id = buf;
  session->mode = mode;
  session->rng = SeededRng(config_.seed, streams::kService).split(ordinal);
  evict_locked(now);
  while (table_.size() >= config_.capacity) {
    table_.erase(lru_.back());
    lru_.pop_back();
  }
  lru_.push_front(session->id);
  table_.emplace(session->id, Slot{session, lru_.begin(), now});
  return session->id;
}

void Engine::evict_locked(std::chrono::steady_clock::time_point now) {
  while (!lru_.empty()) {
    const auto it = table_.find(lru_.back());
    if (now - it->second.last_used < config_.idle_timeout) break;
    table_.erase(it);
    lru_.pop_back();
  }
}

std::shared_ptr<LiveSession> Engine::find(const std::string& session) {
  const auto now = config_.clock();
  std::lock_guard lock(table_mutex_);
  evict_locked(now);
  const auto it = table_.find(session);
  if (it == table_.end()) fail(ErrorKind::NotFound, "unknown session '" + session + "'");
  lru_.splice(lru_.begin(), lru_, it->second.lru);
  it->second.last_used = now;
  return it->second.session;
}

std::size_t Engine::session_count() const {
  std::lock_guard lock(table_mutex_);
  return table_.size();
}

std::vector<std::string> Engine::random_display(LiveSession& s) const {
  const auto& products = state_->catalog().products();
  const std::size_t count = std::min(config_.fsa.display_count, products.size());
  std::vector<std::size_t> order(products.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<std::string> out;
  for (std::size_t i = 0; i < count; ++i) {
    std::swap(order[i], order[i + s.rng.index(order.size() - i)]);
    out.push_back(products[order[i]].id);
  }
  return out;
}

std::vector<std::string> Engine::agent_display(LiveSession& s) const {
  const auto& hyper = state_->agent_hyper();
  const std::size_t take = std::min(hyper.window, s.projections.size());
  const std::vector<Vector> window(s.projections.end() - static_cast<std::ptrdiff_t>(take),
                                   s.projections.end());
  const auto forward = forward_round(state_->agent_params(), hyper, window, s.rng);
  const auto& joint = state_->joint();
  std::vector<std::string> out;
  for (std::size_t row : decode_samples(forward.samples, joint.image_projections())) {
    out.push_back(joint.ids()[row]);
  }
  return out;
}

DialogRound Engine::post_text_query(const std::string& session,
                                    const std::vector<std::string>& tokens) {
  if (tokens.empty()) fail(ErrorKind::InvalidInput, "text query needs at least one token");
  const auto s = find(session);
  std::lock_guard lock(s->mutex);
  const auto& state = *state_;

  DialogContext context = s->context;
  apply_text_query(context, tokens, state.vocab());
  if (context.merged().empty()) {
    fail(ErrorKind::InvalidInput, "query contains no attribute value, gender or category");
  }

  DialogRound round;
  round.query.kind = QueryKind::Text;
  round.query.tokens = tokens;
  round.query.round = s->rounds.size();
  switch (s->mode) {
    case ResponderMode::Rules:
      round.displayed = respond_text(context, state.index(), config_.fsa.display_count);
      break;
    case ResponderMode::Agent:
      s->projections.push_back(state.joint().project_text(tokens));
      round.displayed = agent_display(*s);
      break;
    case ResponderMode::Random:
      round.displayed = random_display(*s);
      break;
  }
  s->context = context;
  round.context = context;
  s->shown.insert(round.displayed.begin(), round.displayed.end());
  s->rounds.push_back(round);
  return round;
}

DialogRound Engine::post_click(const std::string& session, const std::string& product_id) {
  const auto s = find(session);
  std::lock_guard lock(s->mutex);
  const auto& state = *state_;
  if (s->rounds.empty()) fail(ErrorKind::Protocol, "the first query of a session must be text");
  const auto& previous = s->rounds.back().displayed;
  if (std::find(previous.begin(), previous.end(), product_id) == previous.end()) {
    fail(ErrorKind::Protocol, "product '" + product_id + "' is not in the latest display");
  }

  DialogRound round;
  round.query.kind = QueryKind::ImageClick;
  round.query.clicked_id = product_id;
  round.query.round = s->rounds.size();
  switch (s->mode) {
    case ResponderMode::Rules: {
      auto resp = respond_click(state.images(), state.index(), product_id, round.query.round,
                                previous, s->shown, s->context, config_.fsa, s->rng);
      round.displayed = std::move(resp.ids);
      round.n1 = resp.n1;
      break;
    }
    case ResponderMode::Agent:
      s->projections.push_back(state.joint().image_projection(product_id));
      round.displayed = agent_display(*s);
      break;
    case ResponderMode::Random:
      round.displayed = random_display(*s);
      break;
  }
  round.context = s->context;
  s->shown.insert(round.displayed.begin(), round.displayed.end());
  s->rounds.push_back(round);
  return round;
}

std::vector<DialogRound> Engine::history(const std::string& session) {
  const auto s = find(session);
  std::lock_guard lock(s->mutex);
  return s->rounds;
}

ResponderMode Engine::mode_of(const std::string& session) {
  return find(session)->mode;
}

nlohmann::json round_to_api_json(const DialogRound& round, std::size_t index) {
  nlohmann::json j = round.to_json();
  j["round"] = index;
  nlohmann::json images = nlohmann::json::array();
  for (const auto& id : round.displayed) images.push_back("/api/product/" + id + "/image.svg");
  j["images"] = images;
  return j;
}

}  // namespace mmd
