#include "staghunt/egta.hpp"

#include <cmath>
#include <stdexcept>

#include "staghunt/oracle.hpp"

namespace staghunt {

namespace {

struct CellAccumulator {
  std::array<double, 2> sum{0.0, 0.0};
  std::array<double, 2> sum_sq{0.0, 0.0};
  int episodes = 0;

  void add(const std::array<double, 2>& returns) {
    for (int i = 0; i < 2; ++i) {
      sum[i] += returns[i];
      sum_sq[i] += returns[i] * returns[i];
    }
    ++episodes;
  }

  CellStats stats(std::uint64_t seed) const {
    CellStats s;
    s.episodes = episodes;
    s.seed = seed;
    for (int i = 0; i < 2; ++i) {
      s.mean[i] = sum[i] / episodes;
      if (episodes > 1) {
        const double var = (sum_sq[i] - episodes * s.mean[i] * s.mean[i]) / (episodes - 1);
        s.stderr_of_mean[i] = std::sqrt(std::max(var, 0.0) / episodes);
      }
    }
    return s;
  }
};

CellStats run_cell(const AgentPolicy& p0, const AgentPolicy& p1, const EnvConfig& config,
                   const EgtaOptions& opts, std::uint64_t cell_seed) {
  CellAccumulator acc;
  for (int e = 0; e < opts.episodes; ++e) {
    Rng episode_rng(mix_seed(cell_seed, static_cast<std::uint64_t>(e)));
    Rng spawn = opts.fixed_spawn_seed ? Rng(*opts.fixed_spawn_seed).fork(Stream::kSpawn)
                                      : episode_rng.fork(Stream::kSpawn);
    Rng stag = episode_rng.fork(Stream::kStagMove);
    Rng sampling = episode_rng.fork(Stream::kSampling);
    const EpisodeOutcome out =
        play_episode(p0, p1, config, spawn, stag, sampling, /*gamma=*/1.0, opts.max_steps);
    acc.add(out.returns);
  }
  CellStats stats = acc.stats(cell_seed);

  // Means must stay inside the reward envelope of one episode.
  const double limit = config.time_limit ? static_cast<double>(*config.time_limit) : 0.0;
  const double lo = std::min(config.payoffs.m, 0.0) + limit * std::min(config.step_penalty, 0.0);
  for (int i = 0; i < 2; ++i) {
    if (stats.mean[i] < lo - 1e-9 || stats.mean[i] > config.payoffs.h + 1e-9) {
      throw std::logic_error("empirical_payoffs: cell mean outside the reward envelope");
    }
  }
  return stats;
}

}  // namespace

PolicyClassification classify_policy(const AgentPolicy& policy, const EnvConfig& config,
                                     int episodes, Rng& rng, ClassificationThresholds thresholds,
                                     int max_steps) {
  if (episodes < 1) throw std::invalid_argument("classify_policy: episodes must be >= 1");
  const std::uint64_t base = rng.next_u64();
  int joint_hunts = 0;
  for (int e = 0; e < episodes; ++e) {
    Rng episode_rng(mix_seed(base, static_cast<std::uint64_t>(e)));
    Rng spawn = episode_rng.fork(Stream::kSpawn);
    Rng stag = episode_rng.fork(Stream::kStagMove);
    Rng sampling = episode_rng.fork(Stream::kSampling);
    const EpisodeOutcome out =
        play_episode(policy, policy, config, spawn, stag, sampling, 1.0, max_steps);
    if (out.joint_hunt) ++joint_hunts;
  }
  PolicyClassification result;
  result.alpha = static_cast<double>(joint_hunts) / episodes;
  result.episodes = episodes;
  result.thresholds = thresholds;
  if (result.alpha >= thresholds.alpha_c) {
    result.cls = PolicyClass::kCooperative;
  } else if (result.alpha <= thresholds.alpha_d) {
    result.cls = PolicyClass::kDefective;
  } else {
    result.cls = PolicyClass::kUnclassified;
  }
  return result;
}

Payoff2x2 EmpiricalPayoffMatrix::row_payoffs() const {
  return Payoff2x2{.R = cc.mean[0], .P = dd.mean[0], .S = cd.mean[0], .T = dc.mean[0]};
}

Payoff2x2 EmpiricalPayoffMatrix::col_payoffs() const {
  return Payoff2x2{.R = cc.mean[1], .P = dd.mean[1], .S = dc.mean[1], .T = cd.mean[1]};
}

EmpiricalPayoffMatrix empirical_payoffs(const AgentPolicy& coop1, const AgentPolicy& defect1,
                                        const AgentPolicy& coop2, const AgentPolicy& defect2,
                                        const EnvConfig& config, const EgtaOptions& opts,
                                        Rng& rng) {
  if (opts.episodes < 1) throw std::invalid_argument("empirical_payoffs: episodes must be >= 1");
  validate(config);
  const std::uint64_t base = rng.next_u64();
  EmpiricalPayoffMatrix m;
  m.cc = run_cell(coop1, coop2, config, opts, mix_seed(base, 0));
  m.cd = run_cell(coop1, defect2, config, opts, mix_seed(base, 1));
  m.dc = run_cell(defect1, coop2, config, opts, mix_seed(base, 2));
  m.dd = run_cell(defect1, defect2, config, opts, mix_seed(base, 3));
  return m;
}

namespace {

double se2(double a, double b) { return std::sqrt(a * a + b * b); }

}  // namespace

Certification certify(const EmpiricalPayoffMatrix& matrix) {
  const Payoff2x2 p = matrix.row_payoffs();
  const double se_r = matrix.cc.stderr_of_mean[0];
  const double se_p = matrix.dd.stderr_of_mean[0];
  const double se_s = matrix.cd.stderr_of_mean[0];
  const double se_t = matrix.dc.stderr_of_mean[0];

  Certification cert;
  cert.is_mgsd = is_social_dilemma(p);
  cert.stag_hunt_ordered = p.R > p.T && p.T >= p.P && p.P > p.S;
  cert.lines = {
      {"R > P", p.R - p.P, se2(se_r, se_p), p.R > p.P},
      {"R > S", p.R - p.S, se2(se_r, se_s), p.R > p.S},
      {"2R > T + S", 2.0 * p.R - p.T - p.S,
       std::sqrt(4.0 * se_r * se_r + se_t * se_t + se_s * se_s), 2.0 * p.R > p.T + p.S},
      {"T > R", p.T - p.R, se2(se_t, se_r), p.T > p.R},
      {"P > S", p.P - p.S, se2(se_p, se_s), p.P > p.S},
      {"R > T", p.R - p.T, se2(se_r, se_t), p.R > p.T},
      {"T >= P", p.T - p.P, se2(se_t, se_p), p.T >= p.P},
      {"P > S (ordering)", p.P - p.S, se2(se_p, se_s), p.P > p.S},
  };
  return cert;
}

DeviationAudit nash_deviation_audit(const EmpiricalPayoffMatrix& matrix, double forage_ceiling) {
  const Payoff2x2 row = matrix.row_payoffs();
  const Payoff2x2 col = matrix.col_payoffs();

  DeviationAudit audit;
  audit.forage_ceiling = forage_ceiling;
  audit.p_mean = row.P;
  audit.p_stderr = matrix.dd.stderr_of_mean[0];
  audit.sucker_below_mutual_defection = row.S < row.P;
  audit.defection_within_forage_ceiling = row.P <= forage_ceiling + 3.0 * audit.p_stderr;

  const NashResult nash = pure_nash(row, col);
  for (const LabeledProfile& lp : nash.pure_equilibria) {
    if (lp.profile.first == Move::kForage && lp.profile.second == Move::kForage) {
      audit.dd_pure_equilibrium = true;
    }
  }
  return audit;
}

const char* to_string(PolicyClass cls) {
  switch (cls) {
    case PolicyClass::kCooperative: return "Cooperative";
    case PolicyClass::kDefective: return "Defective";
    case PolicyClass::kUnclassified: return "Unclassified";
  }
  return "?";
}

}  // namespace staghunt
