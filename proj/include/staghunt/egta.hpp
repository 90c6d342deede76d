#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "staghunt/env.hpp"
#include "staghunt/matrix_game.hpp"
#include "staghunt/policy.hpp"
#include "staghunt/rng.hpp"

namespace staghunt {

enum class PolicyClass { kCooperative, kDefective, kUnclassified };

struct ClassificationThresholds {
  double alpha_c = 0.5;  // cooperative at or above
  double alpha_d = 0.1;  // defective at or below
};

/// Measured self-play behaviour of one policy: alpha is the fraction of
/// episodes ending in a joint hunt (both agents earned h).
struct PolicyClassification {
  double alpha = 0.0;
  PolicyClass cls = PolicyClass::kUnclassified;
  int episodes = 0;
  ClassificationThresholds thresholds{};
};

/// Runs self-play (the policy controls both agents through their own
/// observations) and classifies by the measured joint-hunt rate.
PolicyClassification classify_policy(const AgentPolicy& policy, const EnvConfig& config,
                                     int episodes, Rng& rng,
                                     ClassificationThresholds thresholds = {},
                                     int max_steps = 10'000);

/// One cell of the meta-game: per-player mean undiscounted episode return with
/// its standard error, plus the seed that replays the cell.
struct CellStats {
  std::array<double, 2> mean{0.0, 0.0};
  std::array<double, 2> stderr_of_mean{0.0, 0.0};
  int episodes = 0;
  std::uint64_t seed = 0;
};

/// Empirical 2x2 meta-game induced by cross-playing sampled policies. Cell
/// (X, Y) plays X as agent 0 (player 1) and Y as agent 1 (player 2).
struct EmpiricalPayoffMatrix {
  CellStats cc;  // (C, C)
  CellStats cd;  // (C, D)
  CellStats dc;  // (D, C)
  CellStats dd;  // (D, D)

  /// Player-1 payoffs in canonical form: R from (C,C), P from (D,D),
  /// S from (C,D), T from (D,C).
  Payoff2x2 row_payoffs() const;
  /// Player-2 payoffs in their own frame (S and T swap cells).
  Payoff2x2 col_payoffs() const;
};

struct EgtaOptions {
  int episodes = 5000;
  /// When set, every episode replays the same spawn draw (deterministic
  /// plant layout); otherwise spawns are re-randomised per episode.
  std::optional<std::uint64_t> fixed_spawn_seed;
  int max_steps = 10'000;
};

/// Plays the four pairings (C,C), (C,D), (D,C), (D,D) for N episodes each and
/// aggregates per-player mean returns. Policies tagged 1 play as agent 0,
/// policies tagged 2 as agent 1. Callers are expected to have classified the
/// inputs (see classify_policy); mismatches are surfaced by the CLI layer.
EmpiricalPayoffMatrix empirical_payoffs(const AgentPolicy& coop1, const AgentPolicy& defect1,
                                        const AgentPolicy& coop2, const AgentPolicy& defect2,
                                        const EnvConfig& config, const EgtaOptions& opts,
                                        Rng& rng);

struct InequalityLine {
  std::string name;
  double margin = 0.0;   // positive means the inequality holds
  double stderr_of_margin = 0.0;
  bool holds = false;
};

struct Certification {
  bool is_mgsd = false;             // via matrix_game::is_social_dilemma on player-1 means
  bool stag_hunt_ordered = false;   // R > T >= P > S
  std::vector<InequalityLine> lines;
};

/// Certifies the sample means. The social-dilemma verdict delegates to
/// matrix_game::is_social_dilemma (no second copy of the inequality logic);
/// the lines report each inequality's margin with its standard error.
Certification certify(const EmpiricalPayoffMatrix& matrix);

struct DeviationAudit {
  bool sucker_below_mutual_defection = false;  // S < P on player-1 means
  bool defection_within_forage_ceiling = false;  // P <= ceiling + 3*stderr
  bool dd_pure_equilibrium = false;  // (Forage,Forage) is a pure NE of the meta-game
  double p_mean = 0.0;
  double p_stderr = 0.0;
  double forage_ceiling = 0.0;
};

/// Checks the empirical evidence that mutual defection is an equilibrium:
/// deviating against a defector pays less than defecting (S < P), the (D,D)
/// value stays within the foraging ceiling, and (D,D) is a pure equilibrium
/// of the meta-game built from both players' sample means.
DeviationAudit nash_deviation_audit(const EmpiricalPayoffMatrix& matrix,
                                    double forage_ceiling = 2.0);

const char* to_string(PolicyClass cls);

}  // namespace staghunt
