#pragma once

#include <vector>

#include "qd/archive/elite_map.hpp"
#include "qd/env/game.hpp"
#include "qd/policy/genome.hpp"
#include "qd/policy/network.hpp"
#include "qd/policy/observation.hpp"

namespace qd::algorithms {

// One fitness evaluation: end-to-end runs of the genome's policy on every
// level, in manifest order. Pure given its inputs.
inline archive::EvaluationResult evaluate_candidate(
    const policy::Genome& genome, const std::vector<env::Level>& levels,
    const env::EnvConfig& env_cfg, const policy::NetworkTopology& topo,
    policy::ObsMode obs_mode, const archive::FeatureScheme& scheme) {
  archive::EvaluationResult res;
  res.per_level.reserve(levels.size());
  for (const auto& level : levels) {
    auto policy_fn = [&](const env::GameState& s, const env::Level& lvl) {
      auto obs = policy::encode(s, lvl, obs_mode);
      return policy::select_action(policy::forward(genome.params, topo, obs));
    };
    auto ep = env::run_episode(level, policy_fn, env_cfg);
    res.total_score += ep.score;
    res.total_timesteps += ep.steps_used;
    res.per_level.push_back(ep);
  }
  res.feature = archive::feature_from_results(res.per_level, scheme);
  return res;
}

}  // namespace qd::algorithms
