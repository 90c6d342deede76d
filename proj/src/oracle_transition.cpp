// Independent transition model for the gridworld Stag Hunt, written directly
// from the game rules. Deliberately shares no helper code with env.cpp: the
// equivalence check compares the two implementations over full enumerations.

#include <cmath>
#include <stdexcept>

#include "staghunt/oracle.hpp"

namespace staghunt {

namespace {

int clamp_int(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

// Where a single agent ends up after its move, walls included.
GridPos moved(GridPos from, Action action, int width, int height) {
  int col = from.x;
  int row = from.y;
  switch (action) {
    case Action::kUp: row -= 1; break;
    case Action::kDown: row += 1; break;
    case Action::kLeft: col -= 1; break;
    case Action::kRight: col += 1; break;
    case Action::kStay: break;
  }
  return GridPos{clamp_int(col, 0, width - 1), clamp_int(row, 0, height - 1)};
}

double euclid(GridPos a, GridPos b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

bool same_cell(GridPos a, GridPos b) { return a.x == b.x && a.y == b.y; }

}  // namespace

std::vector<GridPos> oracle_stag_choices(const EnvState& state, const EnvConfig& config) {
  // The stag always moves to some in-grid neighbouring cell; listed in
  // (row, col) order so both implementations agree on branch identity.
  std::vector<GridPos> options;
  const int col = state.stag.x;
  const int row = state.stag.y;
  if (row - 1 >= 0) options.push_back(GridPos{col, row - 1});
  if (col - 1 >= 0) options.push_back(GridPos{col - 1, row});
  if (col + 1 <= config.width - 1) options.push_back(GridPos{col + 1, row});
  if (row + 1 <= config.height - 1) options.push_back(GridPos{col, row + 1});
  return options;
}

GridPos oracle_follow_destination(const EnvState& state, const EnvConfig& config) {
  // Target: the non-frozen agent nearest to the stag; agent 0 wins ties.
  int target = -1;
  double target_dist = 0.0;
  for (int i = 0; i < 2; ++i) {
    if (state.frozen[i]) continue;
    const double d = euclid(state.stag, state.agents[i]);
    if (target == -1 || d < target_dist) {
      target = i;
      target_dist = d;
    }
  }
  if (target == -1) throw std::logic_error("oracle_follow_destination: both agents frozen");

  // Neighbour closest to the target; ties resolved by smallest (row, col).
  const std::vector<GridPos> options = oracle_stag_choices(state, config);
  GridPos best = options[0];
  double best_dist = euclid(options[0], state.agents[target]);
  for (std::size_t k = 1; k < options.size(); ++k) {
    const double d = euclid(options[k], state.agents[target]);
    const bool closer = d < best_dist;
    const bool tie_smaller = d == best_dist && (options[k].y < best.y ||
                                                (options[k].y == best.y && options[k].x < best.x));
    if (closer || tie_smaller) {
      best = options[k];
      best_dist = d;
    }
  }
  return best;
}

OracleOutcome oracle_transition(const EnvState& state, const std::array<Action, 2>& actions,
                                const EnvConfig& config, std::optional<GridPos> stag_dest) {
  if (state.done) throw std::logic_error("oracle_transition: episode is done");

  OracleOutcome out;
  out.next = state;

  // Both agents move simultaneously; frozen agents do not move.
  for (int i = 0; i < 2; ++i) {
    if (!state.frozen[i]) {
      out.next.agents[i] = moved(state.agents[i], actions[i], config.width, config.height);
    }
  }
  // The stag reacts to where the agents now stand.
  out.next.stag = stag_dest ? *stag_dest : oracle_follow_destination(out.next, config);

  // Rewards are determined at the end of the timestep.
  const bool hunter0 = !state.frozen[0] && same_cell(out.next.agents[0], out.next.stag);
  const bool hunter1 = !state.frozen[1] && same_cell(out.next.agents[1], out.next.stag);
  if (hunter0 && hunter1) {
    // Jointly occupying the stag's cell: both receive the hunting reward.
    out.rewards[0] = config.payoffs.h;
    out.rewards[1] = config.payoffs.h;
    out.newly_frozen[0] = true;
    out.newly_frozen[1] = true;
  } else if (hunter0) {
    out.rewards[0] = config.payoffs.m;
    out.newly_frozen[0] = true;
  } else if (hunter1) {
    out.rewards[1] = config.payoffs.m;
    out.newly_frozen[1] = true;
  }
  // Foraging: an active agent on a plant cell that is not the stag's cell.
  for (int i = 0; i < 2; ++i) {
    if (state.frozen[i] || out.newly_frozen[i]) continue;
    if (same_cell(out.next.agents[i], out.next.stag)) continue;
    const bool on_plant = same_cell(out.next.agents[i], out.next.plants[0]) ||
                          same_cell(out.next.agents[i], out.next.plants[1]);
    if (on_plant) {
      out.rewards[i] = config.payoffs.f;
      out.newly_frozen[i] = true;
    }
  }
  for (int i = 0; i < 2; ++i) {
    if (out.newly_frozen[i]) out.next.frozen[i] = true;
    if (!out.next.frozen[i]) out.rewards[i] += config.step_penalty;
  }

  out.next.t = state.t + 1;
  if (out.next.frozen[0] && out.next.frozen[1]) {
    out.next.done = true;
  } else if (config.time_limit.has_value() && out.next.t >= config.time_limit.value()) {
    out.next.done = true;
    out.truncated = true;
  }
  out.done = out.next.done;
  return out;
}

}  // namespace staghunt
