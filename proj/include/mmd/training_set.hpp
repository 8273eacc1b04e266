#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "mmd/agent.hpp"
#include "mmd/joint_space.hpp"
#include "mmd/simulator.hpp"

namespace mmd {

/// Sessions whose id hashes below 700 of 1000 buckets are used for training.
bool is_training_session(std::string_view session_id);

struct AgentDataset {
  std::vector<TrainingSample> train;
  std::vector<TrainingSample> test;
};

/// Projection of one query into the joint space: text via the text view,
/// clicks via the clicked product's image view.
Vector project_query(const QueryEvent& query, const JointSpace& joint);

/**
 * One sample per dialog round. The window holds the projections of the last
 * min(N_ws, r + 1) queries of the session, the truth the image projections of
 * the displayed products. Throws Data when a session references a product
 * missing from the catalog.
 */
AgentDataset build_training_set(std::span<const DialogSession> sessions, const JointSpace& joint,
                                const AgentHyper& hyper);

}  // namespace mmd
