#include "staghunt/env.hpp"

#include <cstdio>
#include <stdexcept>

namespace staghunt {

namespace {

long long dist2(GridPos a, GridPos b) {
  const long long dx = a.x - b.x;
  const long long dy = a.y - b.y;
  return dx * dx + dy * dy;
}

GridPos clamp_move(GridPos p, Action a, const EnvConfig& c) {
  switch (a) {
    case Action::kUp:    p.y -= 1; break;
    case Action::kDown:  p.y += 1; break;
    case Action::kLeft:  p.x -= 1; break;
    case Action::kRight: p.x += 1; break;
    case Action::kStay:  break;
  }
  if (p.x < 0) p.x = 0;
  if (p.x >= c.width) p.x = c.width - 1;
  if (p.y < 0) p.y = 0;
  if (p.y >= c.height) p.y = c.height - 1;
  return p;
}

// Draws a uniformly random free cell, scanning in row-major (y, x) order so
// the draw is reproducible.
GridPos sample_free_cell(const std::vector<bool>& occupied, const EnvConfig& c, Rng& rng) {
  int free_count = 0;
  for (bool o : occupied) free_count += o ? 0 : 1;
  if (free_count == 0) throw std::logic_error("reset: no free cell left");
  int k = rng.uniform_int(free_count);
  for (int y = 0; y < c.height; ++y) {
    for (int x = 0; x < c.width; ++x) {
      if (occupied[y * c.width + x]) continue;
      if (k == 0) return GridPos{x, y};
      --k;
    }
  }
  throw std::logic_error("reset: free-cell scan out of sync");
}

void occupy(std::vector<bool>& occupied, GridPos p, const EnvConfig& c) {
  occupied[p.y * c.width + p.x] = true;
}

}  // namespace

void validate(const EnvConfig& config) {
  if (config.width < 3 || config.height < 3) {
    throw std::invalid_argument("EnvConfig: grid must be at least 3x3");
  }
  if (config.width * config.height < 5) {
    throw std::invalid_argument("EnvConfig: need at least 5 cells");
  }
  const StagHuntPayoffs& p = config.payoffs;
  if (!(p.h > p.f_star && p.f_star >= p.f && p.f > p.m)) {
    throw std::invalid_argument("EnvConfig: payoffs must satisfy h > f* >= f > m");
  }
  if (config.time_limit && *config.time_limit <= 0) {
    throw std::invalid_argument("EnvConfig: time limit must be positive");
  }
}

EnvState reset(const EnvConfig& config, Rng& spawn_rng) {
  validate(config);
  std::vector<bool> occupied(config.width * config.height, false);
  EnvState s;

  // Fixed entities claim cells before any random draw.
  if (config.agent_spawn == SpawnMode::kFixed) {
    s.agents[0] = GridPos{0, 0};
    s.agents[1] = GridPos{config.width - 1, 0};
    occupy(occupied, s.agents[0], config);
    occupy(occupied, s.agents[1], config);
  }
  if (config.stag_spawn == SpawnMode::kFixed) {
    s.stag = GridPos{config.width / 2, config.height / 2};
    occupy(occupied, s.stag, config);
  }

  if (config.agent_spawn == SpawnMode::kRandom) {
    s.agents[0] = sample_free_cell(occupied, config, spawn_rng);
    occupy(occupied, s.agents[0], config);
    s.agents[1] = sample_free_cell(occupied, config, spawn_rng);
    occupy(occupied, s.agents[1], config);
  }
  if (config.stag_spawn == SpawnMode::kRandom) {
    s.stag = sample_free_cell(occupied, config, spawn_rng);
    occupy(occupied, s.stag, config);
  }

  // Plants are random in every variant.
  s.plants[0] = sample_free_cell(occupied, config, spawn_rng);
  occupy(occupied, s.plants[0], config);
  s.plants[1] = sample_free_cell(occupied, config, spawn_rng);
  occupy(occupied, s.plants[1], config);

  s.frozen = {false, false};
  s.t = 0;
  s.done = false;
  return s;
}

std::vector<GridPos> stag_neighbors(GridPos stag, const EnvConfig& config) {
  std::vector<GridPos> cells;
  cells.reserve(4);
  // (y, x) order: up, left, right, down.
  if (stag.y > 0) cells.push_back({stag.x, stag.y - 1});
  if (stag.x > 0) cells.push_back({stag.x - 1, stag.y});
  if (stag.x + 1 < config.width) cells.push_back({stag.x + 1, stag.y});
  if (stag.y + 1 < config.height) cells.push_back({stag.x, stag.y + 1});
  return cells;
}

GridPos stag_move_follow(const EnvState& state, const EnvConfig& config) {
  int target = -1;
  long long best = 0;
  for (int i = 0; i < 2; ++i) {
    if (state.frozen[i]) continue;
    const long long d = dist2(state.stag, state.agents[i]);
    if (target < 0 || d < best) {
      target = i;
      best = d;
    }
  }
  if (target < 0) throw std::logic_error("stag_move_follow: no active agent");

  const std::vector<GridPos> cells = stag_neighbors(state.stag, config);
  GridPos pick = cells.front();
  long long pick_d = dist2(pick, state.agents[target]);
  for (const GridPos& c : cells) {
    const long long d = dist2(c, state.agents[target]);
    if (d < pick_d) {  // cells are (y, x)-ordered, so first minimum wins ties
      pick = c;
      pick_d = d;
    }
  }
  return pick;
}

GridPos stag_move_random(const EnvState& state, const EnvConfig& config, Rng& stag_rng) {
  const std::vector<GridPos> cells = stag_neighbors(state.stag, config);
  return cells[stag_rng.uniform_int(static_cast<int>(cells.size()))];
}

void apply_agent_moves(EnvState& state, const std::array<Action, 2>& actions,
                       const EnvConfig& config) {
  for (int i = 0; i < 2; ++i) {
    if (!state.frozen[i]) state.agents[i] = clamp_move(state.agents[i], actions[i], config);
  }
}

namespace {

// Phases 2 and 3, applied after the agents have moved.
StepResult finish_step(EnvState& state, const EnvConfig& config, GridPos stag_dest) {
  state.stag = stag_dest;

  // Phase 3: rewards on final occupancy. Stag-cell outcomes take priority
  // over plant occupancy.
  StepResult result;
  const bool on_stag0 = !state.frozen[0] && state.agents[0] == state.stag;
  const bool on_stag1 = !state.frozen[1] && state.agents[1] == state.stag;
  if (on_stag0 && on_stag1) {
    result.rewards = {config.payoffs.h, config.payoffs.h};
    result.newly_frozen = {true, true};
  } else if (on_stag0 || on_stag1) {
    const int i = on_stag0 ? 0 : 1;
    result.rewards[i] = config.payoffs.m;
    result.newly_frozen[i] = true;
  }
  for (int i = 0; i < 2; ++i) {
    if (state.frozen[i] || result.newly_frozen[i]) continue;
    if (state.agents[i] == state.stag) continue;
    if (state.agents[i] == state.plants[0] || state.agents[i] == state.plants[1]) {
      result.rewards[i] = config.payoffs.f;
      result.newly_frozen[i] = true;
    }
  }
  for (int i = 0; i < 2; ++i) {
    if (result.newly_frozen[i]) state.frozen[i] = true;
  }
  // Agents still active at the end of the step pay the timestep penalty.
  for (int i = 0; i < 2; ++i) {
    if (!state.frozen[i]) result.rewards[i] += config.step_penalty;
  }

  state.t += 1;
  if (state.frozen[0] && state.frozen[1]) {
    state.done = true;
  } else if (config.time_limit && state.t >= *config.time_limit) {
    state.done = true;
    result.truncated = true;
  }
  result.done = state.done;
  return result;
}

}  // namespace

StepResult step_with_stag_dest(EnvState& state, const std::array<Action, 2>& actions,
                               const EnvConfig& config, GridPos stag_dest) {
  if (state.done) throw std::logic_error("step: episode is done");
  apply_agent_moves(state, actions, config);
  return finish_step(state, config, stag_dest);
}

StepResult step(EnvState& state, const std::array<Action, 2>& actions, const EnvConfig& config,
                Rng& stag_rng) {
  if (state.done) throw std::logic_error("step: episode is done");
  apply_agent_moves(state, actions, config);
  const GridPos dest = config.stag_move == StagMode::kFollows
                           ? stag_move_follow(state, config)
                           : stag_move_random(state, config, stag_rng);
  return finish_step(state, config, dest);
}

EnvConfig variant(std::string_view label) {
  if (label.size() != 3) throw std::invalid_argument("variant: label must be three letters");
  auto spawn = [](char c) {
    if (c == 'F') return SpawnMode::kFixed;
    if (c == 'R') return SpawnMode::kRandom;
    throw std::invalid_argument("variant: letters must be F or R");
  };
  EnvConfig config;
  config.agent_spawn = spawn(label[0]);
  config.stag_spawn = spawn(label[1]);
  config.stag_move = label[2] == 'F'   ? StagMode::kFollows
                     : label[2] == 'R' ? StagMode::kRandom
                                       : throw std::invalid_argument("variant: letters must be F or R");
  return config;
}

EnvConfig coop_variant(EnvConfig base) {
  base.payoffs.f = 0.0;
  base.payoffs.f_star = 0.0;
  base.step_penalty = -0.5;
  return base;
}

Observation observe(const EnvState& state, int agent_id, const EnvConfig& config) {
  if (agent_id < 0 || agent_id > 1) throw std::invalid_argument("observe: agent_id must be 0 or 1");
  const int self = agent_id;
  const int other = 1 - agent_id;
  const double sx = 1.0 / (config.width - 1);
  const double sy = 1.0 / (config.height - 1);
  return Observation{
      state.agents[self].x * sx,  state.agents[self].y * sy,
      state.agents[other].x * sx, state.agents[other].y * sy,
      state.stag.x * sx,          state.stag.y * sy,
      state.plants[0].x * sx,     state.plants[0].y * sy,
      state.plants[1].x * sx,     state.plants[1].y * sy,
      state.frozen[self] ? 1.0 : 0.0,
      state.frozen[other] ? 1.0 : 0.0,
  };
}

std::string trajectory_csv_header() {
  return "t,a0_x,a0_y,a1_x,a1_y,stag_x,stag_y,plant0_x,plant0_y,plant1_x,plant1_y,"
         "action0,action1,reward0,reward1,frozen0,frozen1";
}

std::string trajectory_csv_row(const EnvState& state, const std::array<Action, 2>& actions,
                               const StepResult& result) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%d,%d,%d,%d,%d,%d,%d,%d,%d,%d,%d,%s,%s,%.17g,%.17g,%d,%d",
                state.t - 1, state.agents[0].x, state.agents[0].y, state.agents[1].x,
                state.agents[1].y, state.stag.x, state.stag.y, state.plants[0].x,
                state.plants[0].y, state.plants[1].x, state.plants[1].y, action_name(actions[0]),
                action_name(actions[1]), result.rewards[0], result.rewards[1],
                state.frozen[0] ? 1 : 0, state.frozen[1] ? 1 : 0);
  return buf;
}

const char* action_name(Action a) {
  switch (a) {
    case Action::kUp: return "Up";
    case Action::kDown: return "Down";
    case Action::kLeft: return "Left";
    case Action::kRight: return "Right";
    case Action::kStay: return "Stay";
  }
  return "?";
}

}  // namespace staghunt
