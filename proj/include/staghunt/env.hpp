#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "staghunt/matrix_game.hpp"
#include "staghunt/rng.hpp"

namespace staghunt {

enum class Action : int { kUp = 0, kDown = 1, kLeft = 2, kRight = 3, kStay = 4 };
constexpr int kNumActions = 5;

/// Grid coordinate: x is the column, y is the row, (0,0) is the upper-left
/// cell. "Up" decreases y, "Down" increases y.
struct GridPos {
  int x = 0;
  int y = 0;

  bool operator==(const GridPos&) const = default;
};

enum class SpawnMode { kFixed, kRandom };
enum class StagMode { kFollows, kRandom };

struct EnvConfig {
  int width = 5;
  int height = 5;
  StagHuntPayoffs payoffs{};      // h=25, f=f*=2, m=-1
  double step_penalty = 0.0;      // applied per timestep to each agent still active
  SpawnMode agent_spawn = SpawnMode::kFixed;
  SpawnMode stag_spawn = SpawnMode::kFixed;
  StagMode stag_move = StagMode::kFollows;
  /// Safety cap for training rollouts. Episodes hitting the cap end truncated
  /// with no terminal reward. Unset means no cap (exact evaluation supplies
  /// its own horizon).
  std::optional<int> time_limit = 500;
};

struct EnvState {
  std::array<GridPos, 2> agents{};
  std::array<bool, 2> frozen{false, false};
  GridPos stag{};
  std::array<GridPos, 2> plants{};
  int t = 0;
  bool done = false;

  bool operator==(const EnvState&) const = default;
};

struct StepResult {
  std::array<double, 2> rewards{0.0, 0.0};
  std::array<bool, 2> newly_frozen{false, false};
  bool done = false;
  bool truncated = false;
};

/// Throws std::invalid_argument when the grid is smaller than 3x3, the
/// payoffs violate h > f* >= f > m, or the time limit is non-positive.
void validate(const EnvConfig& config);

/// Spawns a fresh episode. Fixed entities claim their cells first (blue agent
/// (0,0), red agent (width-1,0), stag at the centre cell), then each random
/// entity samples uniformly from the cells still free, in the order agent 0,
/// agent 1, stag, plant 0, plant 1. Plants are random in every variant. All
/// five cells are distinct.
EnvState reset(const EnvConfig& config, Rng& spawn_rng);

/// Advances one timestep: agents move simultaneously (border moves clamp, a
/// frozen agent ignores its action), then the stag moves per its mode — a
/// Follows stag targets the agents' already-updated positions — then rewards
/// are settled on the final occupancy:
///   - both active agents on the stag cell -> each earns h and freezes;
///   - exactly one active agent on the stag cell -> it earns m and freezes;
///   - an active agent on a plant cell (and not on the stag cell) -> it earns
///     f and freezes; both agents may forage the same plant in one step;
///   - every agent still active after the above earns step_penalty.
/// The episode is done when both agents are frozen, or truncated (no terminal
/// reward) when the time limit is reached. Throws if the episode is done.
StepResult step(EnvState& state, const std::array<Action, 2>& actions, const EnvConfig& config,
                Rng& stag_rng);

/// Phase 1 alone: moves the non-frozen agents. Exposed for exhaustive
/// checkers that need to interleave with the stag phase.
void apply_agent_moves(EnvState& state, const std::array<Action, 2>& actions,
                       const EnvConfig& config);

/// Deterministic variant of step() with the stag's destination supplied, so
/// exhaustive checkers can enumerate every random-stag branch. The candidate
/// destinations are stag_neighbors() of the pre-step stag cell (agent moves
/// do not change them).
StepResult step_with_stag_dest(EnvState& state, const std::array<Action, 2>& actions,
                               const EnvConfig& config, GridPos stag_dest);

/// The stag's in-grid 4-neighbourhood, ordered by (y, x). Never includes the
/// stag's own cell: the stag always moves.
std::vector<GridPos> stag_neighbors(GridPos stag, const EnvConfig& config);

/// Follows-mode move for the state as given (step() applies it after the
/// agents have moved): targets the non-frozen agent nearest to the stag by
/// Euclidean distance (ties go to agent 0) and returns the neighbouring cell
/// closest to that target, ties broken by smallest (y, x).
GridPos stag_move_follow(const EnvState& state, const EnvConfig& config);

/// Random-mode move: uniform over the in-grid 4-neighbours.
GridPos stag_move_random(const EnvState& state, const EnvConfig& config, Rng& stag_rng);

/// Builds the environment for a three-letter variant label (Table of eight:
/// FFF, RFF, FRF, FFR, RRF, FRR, RFR, RRR). Letters select agent spawn, stag
/// spawn and stag movement; F = Fixed/Follows, R = Random.
EnvConfig variant(std::string_view label);

/// Cooperation-inducing companion of a variant: foraging reward zeroed
/// (f = f* = 0) and a -0.5 timestep penalty added; hunting and mauling
/// rewards and all randomisation modes are preserved. Idempotent.
EnvConfig coop_variant(EnvConfig base);

constexpr int kObsDim = 12;
using Observation = std::array<double, kObsDim>;

/// Fully observable, agent-centred observation:
/// [self x,y, other x,y, stag x,y, plant0 x,y, plant1 x,y, self frozen,
/// other frozen], coordinates scaled by 1/(dimension-1) into [0,1].
Observation observe(const EnvState& state, int agent_id, const EnvConfig& config);

/// Trajectory dump format: one CSV line per timestep holding the step index,
/// post-step entity positions, the actions taken, the rewards earned and the
/// post-step frozen flags.
std::string trajectory_csv_header();
std::string trajectory_csv_row(const EnvState& state, const std::array<Action, 2>& actions,
                               const StepResult& result);

const char* action_name(Action a);

}  // namespace staghunt
