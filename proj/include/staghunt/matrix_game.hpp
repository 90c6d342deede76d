#pragma once

#include <array>
#include <optional>
#include <utility>
#include <vector>

namespace staghunt {

/// Strategy in the 2x2 game. Hunt is the cooperate action, Forage the defect
/// action.
enum class Move { kHunt, kForage };

constexpr std::array<Move, 2> kMoves = {Move::kHunt, Move::kForage};

/// Canonical 2x2 social-dilemma payoffs in the owning player's frame:
///   R = both cooperate, P = both defect,
///   S = self cooperates vs defector, T = self defects vs cooperator.
struct Payoff2x2 {
  double R = 0.0;
  double P = 0.0;
  double S = 0.0;
  double T = 0.0;

  bool operator==(const Payoff2x2&) const = default;
};

/// Stag Hunt payoff parameters: h hunt reward, f forage reward, f_star forage
/// reward while the other player is mauled, m mauling reward.
struct StagHuntPayoffs {
  double h = 25.0;
  double f = 2.0;
  double f_star = 2.0;
  double m = -1.0;

  bool operator==(const StagHuntPayoffs&) const = default;
};

enum class EqLabel { kPayoffDominant, kRiskDominant, kOther };

using Profile = std::pair<Move, Move>;

struct LabeledProfile {
  Profile profile;
  EqLabel label = EqLabel::kOther;
};

/// Result of equilibrium analysis on a 2x2 game.
struct NashResult {
  std::vector<LabeledProfile> pure_equilibria;
  /// Symmetric mixed equilibrium's hunt probability; only set when it lies
  /// strictly inside (0, 1).
  std::optional<double> mixed_hunt_probability;
};

/// Maps Stag Hunt parameters onto the canonical form: R=h, P=f, S=m, T=f*.
Payoff2x2 to_mgsd(const StagHuntPayoffs& sh);

/// True iff the five social-dilemma inequalities hold:
/// R>P, R>S, 2R>T+S, and (T>R or P>S).
bool is_social_dilemma(const Payoff2x2& p);

/// True iff h > f* >= f > m.
bool is_stag_hunt(const StagHuntPayoffs& sh);

/// Enumerates the pure Nash equilibria of the bimatrix game given by the two
/// players' own-frame payoffs (a symmetric game passes the same payoffs
/// twice). A profile qualifies when neither player strictly improves by a
/// unilateral deviation. For symmetric games with Stag-Hunt-ordered payoffs
/// (R > T >= P > S), (Hunt,Hunt) is labeled payoff-dominant and
/// (Forage,Forage) risk-dominant; every other case is labeled kOther.
NashResult pure_nash(const Payoff2x2& row, const Payoff2x2& col);

/// Hunt probability p making a player indifferent between Hunt and Forage
/// when the opponent hunts with probability p:
///   p = (f - m) / ((h - f*) + (f - m)).
/// Requires a strict Stag Hunt (h > f* and f > m); throws otherwise.
double mixed_nash_symmetric(const StagHuntPayoffs& sh);

/// pure_nash plus the symmetric mixed equilibrium when the payoffs form a
/// strict symmetric Stag Hunt and the probability is interior.
NashResult analyze_symmetric(const StagHuntPayoffs& sh);

}  // namespace staghunt
