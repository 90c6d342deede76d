#pragma once

#include <utility>
#include <vector>

#include "staghunt/env.hpp"
#include "staghunt/policy.hpp"
#include "staghunt/rng.hpp"

namespace staghunt {

enum class ScriptedKind { kGreedyHunt, kGreedyForage, kStationary, kUniformRandom };

/// Heuristic action for the scripted kind:
///   GreedyHunt    moves toward the stag along the axis with the larger
///                 coordinate gap (ties go horizontal);
///   GreedyForage  likewise toward the nearest plant (Euclidean, ties to
///                 plant 0);
///   Stationary    always stays;
///   UniformRandom uniform over the five actions.
Action scripted_action(ScriptedKind kind, const EnvState& state, int agent_id, Rng& rng);

/// Action distribution of a scripted kind; deterministic kinds put weight 1
/// on a single action. Used by exact evaluation to enumerate branches.
std::vector<std::pair<Action, double>> scripted_distribution(ScriptedKind kind,
                                                             const EnvState& state, int agent_id);

class ScriptedAgent : public AgentPolicy {
 public:
  explicit ScriptedAgent(ScriptedKind kind) : kind_(kind) {}

  Action act(const EnvState& state, int agent_id, const EnvConfig& config,
             Rng& rng) const override {
    (void)config;
    return scripted_action(kind_, state, agent_id, rng);
  }

  ScriptedKind kind() const { return kind_; }

 private:
  ScriptedKind kind_;
};

}  // namespace staghunt
