#include "staghunt/matrix_game.hpp"

#include <cmath>
#include <stdexcept>

namespace staghunt {

namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw std::invalid_argument(std::string("non-finite payoff: ") + what);
}

void require_finite(const Payoff2x2& p) {
  require_finite(p.R, "R");
  require_finite(p.P, "P");
  require_finite(p.S, "S");
  require_finite(p.T, "T");
}

void require_finite(const StagHuntPayoffs& sh) {
  require_finite(sh.h, "h");
  require_finite(sh.f, "f");
  require_finite(sh.f_star, "f_star");
  require_finite(sh.m, "m");
}

// Own-frame payoff lookup: what `self` earns playing `mine` against `theirs`.
double payoff(const Payoff2x2& self, Move mine, Move theirs) {
  if (mine == Move::kHunt) return theirs == Move::kHunt ? self.R : self.S;
  return theirs == Move::kHunt ? self.T : self.P;
}

Move other(Move a) { return a == Move::kHunt ? Move::kForage : Move::kHunt; }

bool stag_hunt_ordered(const Payoff2x2& p) { return p.R > p.T && p.T >= p.P && p.P > p.S; }

}  // namespace

Payoff2x2 to_mgsd(const StagHuntPayoffs& sh) {
  require_finite(sh);
  return Payoff2x2{.R = sh.h, .P = sh.f, .S = sh.m, .T = sh.f_star};
}

bool is_social_dilemma(const Payoff2x2& p) {
  require_finite(p);
  return p.R > p.P && p.R > p.S && 2.0 * p.R > p.T + p.S && (p.T > p.R || p.P > p.S);
}

bool is_stag_hunt(const StagHuntPayoffs& sh) {
  require_finite(sh);
  return sh.h > sh.f_star && sh.f_star >= sh.f && sh.f > sh.m;
}

NashResult pure_nash(const Payoff2x2& row, const Payoff2x2& col) {
  require_finite(row);
  require_finite(col);

  // Dominance labels only apply to symmetric Stag-Hunt-ordered games.
  const bool label_stag_hunt = row == col && stag_hunt_ordered(row);

  NashResult result;
  for (Move a : kMoves) {
    for (Move b : kMoves) {
      const bool row_stable = payoff(row, a, b) >= payoff(row, other(a), b);
      const bool col_stable = payoff(col, b, a) >= payoff(col, other(b), a);
      if (!row_stable || !col_stable) continue;

      EqLabel label = EqLabel::kOther;
      if (label_stag_hunt && a == Move::kHunt && b == Move::kHunt) {
        label = EqLabel::kPayoffDominant;
      } else if (label_stag_hunt && a == Move::kForage && b == Move::kForage) {
        label = EqLabel::kRiskDominant;
      }
      result.pure_equilibria.push_back({{a, b}, label});
    }
  }
  return result;
}

double mixed_nash_symmetric(const StagHuntPayoffs& sh) {
  if (!is_stag_hunt(sh) || !(sh.h > sh.f_star) || !(sh.f > sh.m)) {
    throw std::invalid_argument("mixed_nash_symmetric: requires h > f* and f > m");
  }
  const double denom = (sh.h - sh.f_star) + (sh.f - sh.m);
  if (denom == 0.0) throw std::invalid_argument("mixed_nash_symmetric: zero denominator");
  return (sh.f - sh.m) / denom;
}

NashResult analyze_symmetric(const StagHuntPayoffs& sh) {
  const Payoff2x2 p = to_mgsd(sh);
  NashResult result = pure_nash(p, p);
  if (is_stag_hunt(sh) && sh.h > sh.f_star && sh.f > sh.m) {
    const double q = mixed_nash_symmetric(sh);
    if (q > 0.0 && q < 1.0) result.mixed_hunt_probability = q;
  }
  return result;
}

}  // namespace staghunt
