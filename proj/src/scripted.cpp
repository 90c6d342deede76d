#include "staghunt/scripted.hpp"

#include <cstdlib>

namespace staghunt {

namespace {

Action move_toward(GridPos self, GridPos target) {
  const int dx = target.x - self.x;
  const int dy = target.y - self.y;
  if (dx == 0 && dy == 0) return Action::kStay;
  if (std::abs(dx) >= std::abs(dy)) {  // tie goes horizontal
    return dx > 0 ? Action::kRight : Action::kLeft;
  }
  return dy > 0 ? Action::kDown : Action::kUp;
}

GridPos nearest_plant(const EnvState& state, int agent_id) {
  const GridPos self = state.agents[agent_id];
  auto d2 = [&](GridPos p) {
    const long long dx = p.x - self.x;
    const long long dy = p.y - self.y;
    return dx * dx + dy * dy;
  };
  return d2(state.plants[1]) < d2(state.plants[0]) ? state.plants[1] : state.plants[0];
}

Action deterministic_action(ScriptedKind kind, const EnvState& state, int agent_id) {
  switch (kind) {
    case ScriptedKind::kGreedyHunt:
      return move_toward(state.agents[agent_id], state.stag);
    case ScriptedKind::kGreedyForage:
      return move_toward(state.agents[agent_id], nearest_plant(state, agent_id));
    case ScriptedKind::kStationary:
      return Action::kStay;
    case ScriptedKind::kUniformRandom:
      break;
  }
  return Action::kStay;
}

}  // namespace

Action scripted_action(ScriptedKind kind, const EnvState& state, int agent_id, Rng& rng) {
  if (kind == ScriptedKind::kUniformRandom) {
    return static_cast<Action>(rng.uniform_int(kNumActions));
  }
  return deterministic_action(kind, state, agent_id);
}

std::vector<std::pair<Action, double>> scripted_distribution(ScriptedKind kind,
                                                             const EnvState& state, int agent_id) {
  if (kind == ScriptedKind::kUniformRandom) {
    std::vector<std::pair<Action, double>> dist;
    dist.reserve(kNumActions);
    for (int a = 0; a < kNumActions; ++a) {
      dist.emplace_back(static_cast<Action>(a), 1.0 / kNumActions);
    }
    return dist;
  }
  return {{deterministic_action(kind, state, agent_id), 1.0}};
}

}  // namespace staghunt
