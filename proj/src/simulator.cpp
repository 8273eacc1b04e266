#include "mmd/simulator.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <set>

#include "mmd/error.hpp"

namespace mmd {

std::string session_id(std::size_t ordinal) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "S%06zu", ordinal);
  return buf;
}

DialogSession generate_session(const Storefront& store, const FsaConfig& config,
                               const std::string& id, SeededRng rng) {
  DialogSession session{id, {}};
  DialogContext context;
  std::set<std::string> shown;
  FsaNode node = FsaNode::Start;
  while (session.rounds.size() < config.max_rounds) {
    node = step_fsa(node, context, config, rng);
    if (node == FsaNode::End) break;
    const std::size_t r = session.rounds.size();
    DialogRound round;
    if (node == FsaNode::ImageClick) {
      const auto& previous = session.rounds.back().displayed;
      QueryEvent q;
      q.kind = QueryKind::ImageClick;
      q.round = r;
      q.clicked_id = previous[rng.index(previous.size())];
      auto resp = respond_click(store.images, store.index, q.clicked_id, r, previous, shown,
                                context, config, rng);
      round.query = std::move(q);
      round.displayed = std::move(resp.ids);
      round.n1 = resp.n1;
    } else {
      round.query = gen_text_query(node, context, store.vocab, config, rng, r);
      round.displayed = respond_text(context, store.index, config.display_count);
    }
    round.context = context;
    shown.insert(round.displayed.begin(), round.displayed.end());
    session.rounds.push_back(std::move(round));
  }
  return session;
}

std::vector<DialogSession> generate_dataset(const Storefront& store, const FsaConfig& config,
                                            std::size_t sessions, const SeededRng& rng) {
  config.validate();
  std::vector<DialogSession> out(sessions);
  const auto n = static_cast<std::int64_t>(sessions);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto ordinal = static_cast<std::size_t>(i) + 1;
    out[static_cast<std::size_t>(i)] =
        generate_session(store, config, session_id(ordinal), rng.split(ordinal));
  }
  return out;
}

void validate_session(const DialogSession& s, const FsaConfig& config) {
  auto bad = [&](std::size_t r, const std::string& what) {
    fail(ErrorKind::Data, "session " + s.id + " round " + std::to_string(r) + ": " + what);
  };
  if (s.rounds.empty()) fail(ErrorKind::Data, "session " + s.id + " has no rounds");
  if (s.rounds.size() > config.max_rounds) fail(ErrorKind::Data, "session " + s.id + " too long");
  for (std::size_t r = 0; r < s.rounds.size(); ++r) {
    const auto& round = s.rounds[r];
    if (round.query.round != r) bad(r, "round index mismatch");
    if (r == 0 && round.query.kind != QueryKind::Text) bad(r, "first query is not text");
    if (round.query.kind == QueryKind::Text) {
      if (round.query.tokens.empty() || !round.query.clicked_id.empty()) bad(r, "bad text payload");
      if (round.n1) bad(r, "text round carries n1");
    } else {
      if (!round.query.tokens.empty() || round.query.clicked_id.empty()) bad(r, "bad click payload");
      const auto& prev = s.rounds[r - 1].displayed;
      if (std::find(prev.begin(), prev.end(), round.query.clicked_id) == prev.end()) {
        bad(r, "click on a product that was not displayed");
      }
      if (!round.n1) bad(r, "click round without n1");
    }
    std::set<std::string> distinct(round.displayed.begin(), round.displayed.end());
    if (distinct.size() != round.displayed.size()) bad(r, "duplicate displayed ids");
  }
}

nlohmann::json DialogRound::to_json() const {
  return {{"query", query.to_json()},
          {"displayed", displayed},
          {"context", context.to_json()},
          {"n1", n1 ? nlohmann::json(*n1) : nlohmann::json(nullptr)}};
}

DialogRound DialogRound::from_json(const nlohmann::json& j) {
  DialogRound r;
  r.query = QueryEvent::from_json(j.at("query"));
  r.displayed = j.at("displayed").get<std::vector<std::string>>();
  r.context = DialogContext::from_json(j.at("context"));
  if (j.contains("n1") && !j["n1"].is_null()) r.n1 = j["n1"].get<std::size_t>();
  return r;
}

nlohmann::json DialogSession::to_json() const {
  nlohmann::json rounds_json = nlohmann::json::array();
  for (const auto& r : rounds) rounds_json.push_back(r.to_json());
  return {{"session_id", id}, {"rounds", rounds_json}};
}

DialogSession DialogSession::from_json(const nlohmann::json& j) {
  DialogSession s;
  s.id = j.at("session_id").get<std::string>();
  for (const auto& r : j.at("rounds")) s.rounds.push_back(DialogRound::from_json(r));
  return s;
}

std::string sessions_to_jsonl(const std::vector<DialogSession>& sessions) {
  std::string out;
  for (const auto& s : sessions) {
    out += s.to_json().dump();
    out += '\n';
  }
  return out;
}

}  // namespace mmd
