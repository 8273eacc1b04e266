#include "mmd/training_set.hpp"

#include <algorithm>

#include "mmd/error.hpp"
#include "mmd/rng.hpp"

namespace mmd {

bool is_training_session(std::string_view session_id) {
  return stable_hash(session_id) % 1000 < 700;
}

Vector project_query(const QueryEvent& query, const JointSpace& joint) {
  if (query.kind == QueryKind::Text) return joint.project_text(query.tokens);
  return joint.image_projection(query.clicked_id);
}

AgentDataset build_training_set(std::span<const DialogSession> sessions, const JointSpace& joint,
                                const AgentHyper& hyper) {
  hyper.validate();
  AgentDataset out;
  for (const auto& session : sessions) {
    auto& target = is_training_session(session.id) ? out.train : out.test;
    std::vector<Vector> history;
    for (const auto& round : session.rounds) {
      try {
        history.push_back(project_query(round.query, joint));
        TrainingSample sample;
        const std::size_t take = std::min(hyper.window, history.size());
        sample.window.assign(history.end() - static_cast<std::ptrdiff_t>(take), history.end());
        for (const auto& id : round.displayed) sample.truth.push_back(joint.image_projection(id));
        target.push_back(std::move(sample));
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::NotFound) throw;
        fail(ErrorKind::Data, "session " + session.id + ": " + e.what());
      }
    }
  }
  return out;
}

}  // namespace mmd
