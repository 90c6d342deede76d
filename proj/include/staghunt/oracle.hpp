#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "staghunt/env.hpp"
#include "staghunt/policy.hpp"
#include "staghunt/rng.hpp"
#include "staghunt/scripted.hpp"

namespace staghunt {

/// Exact per-agent expected returns from exhaustive expansion of the
/// stochastic transition tree, plus the probability mass still running at the
/// horizon.
struct ExactValue {
  std::array<double, 2> discounted{0.0, 0.0};
  std::array<double, 2> undiscounted{0.0, 0.0};
  int horizon = 0;
  double truncation_mass = 0.0;
};

struct ExactValueOptions {
  double gamma = 0.99;
  int horizon = 200;
  /// Hard cap on memo entries; exceeding it aborts with an error rather than
  /// silently thrashing.
  std::size_t memo_budget = 4'000'000;
};

/// Exact value of a scripted policy pair from one start state. Branches over
/// each agent's action distribution and the stag's move choices (Follows is a
/// single branch, Random up to four), memoising on (state, t).
ExactValue exact_value(const EnvConfig& config, ScriptedKind policy0, ScriptedKind policy1,
                       const EnvState& start, const ExactValueOptions& opts);

/// Exact value in expectation over the spawn distribution of `config`:
/// enumerates every reset outcome with its probability and averages
/// exact_value over them. Rejects configs whose spawn branching exceeds the
/// budget.
ExactValue exact_value_over_spawns(const EnvConfig& config, ScriptedKind policy0,
                                   ScriptedKind policy1, const ExactValueOptions& opts);

/// All reset outcomes of a config with their probabilities.
std::vector<std::pair<EnvState, double>> enumerate_spawns(const EnvConfig& config,
                                                          std::size_t budget = 1'000'000);

struct EpisodeOutcome {
  std::array<double, 2> returns{0.0, 0.0};     // undiscounted
  std::array<double, 2> discounted{0.0, 0.0};  // with the gamma passed in
  bool joint_hunt = false;                     // both agents earned h
  bool truncated = false;
  int steps = 0;
};

/// Plays one full episode with the given policies and streams.
EpisodeOutcome play_episode(const AgentPolicy& policy0, const AgentPolicy& policy1,
                            const EnvConfig& config, Rng& spawn_rng, Rng& stag_rng,
                            Rng& sampling_rng, double gamma, int max_steps);

struct MonteCarloValue {
  std::array<double, 2> mean{0.0, 0.0};
  std::array<double, 2> stderr_of_mean{0.0, 0.0};
  int episodes = 0;
};

/// Sample estimate of the discounted per-agent value over fresh episodes.
/// gamma = 1 gives undiscounted returns.
MonteCarloValue monte_carlo_value(const EnvConfig& config, const AgentPolicy& policy0,
                                  const AgentPolicy& policy1, int episodes, double gamma,
                                  Rng& rng, int max_steps = 10'000);

struct EquivalenceReport {
  std::size_t states = 0;
  std::size_t transitions = 0;
  std::vector<std::string> mismatches;  // capped at a handful of examples

  bool passed() const { return mismatches.empty(); }
};

/// Enumerates every (reachable state, joint action, stag branch) of the
/// config from all possible spawns and compares the environment's transition
/// against the independently written straight-from-the-rules model below.
/// Time limits are ignored during the walk so the reachable set is finite.
EquivalenceReport transition_equivalence_check(const EnvConfig& config,
                                               std::size_t max_mismatch_reports = 10);

// --- independent transition model (the oracle side of the check) ---
// Implemented from the environment rules alone, sharing no logic with
// env.cpp. Kept in the library so the oracle-check CLI command can run it.

struct OracleOutcome {
  EnvState next;
  std::array<double, 2> rewards{0.0, 0.0};
  std::array<bool, 2> newly_frozen{false, false};
  bool done = false;
  bool truncated = false;
};

/// One transition under the rules. A supplied `stag_dest` selects a
/// random-mode branch; an empty optional means Follows mode, in which the
/// destination is derived from the rules after the agents have moved.
OracleOutcome oracle_transition(const EnvState& state, const std::array<Action, 2>& actions,
                                const EnvConfig& config, std::optional<GridPos> stag_dest);

/// Follows-mode destination for the positions as given.
GridPos oracle_follow_destination(const EnvState& state, const EnvConfig& config);

/// Candidate destinations of a random-mode stag (pre-step stag cell).
std::vector<GridPos> oracle_stag_choices(const EnvState& state, const EnvConfig& config);

}  // namespace staghunt
