#include "staghunt/oracle.hpp"

#include <cmath>
#include <deque>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace staghunt {

namespace {

// Packs positions and flags into one word (coordinates < 32); t excluded.
std::uint64_t pack_state(const EnvState& s) {
  auto cell = [](GridPos p) {
    return static_cast<std::uint64_t>(p.x) | (static_cast<std::uint64_t>(p.y) << 5);
  };
  std::uint64_t key = cell(s.agents[0]);
  key = (key << 10) | cell(s.agents[1]);
  key = (key << 10) | cell(s.stag);
  key = (key << 10) | cell(s.plants[0]);
  key = (key << 10) | cell(s.plants[1]);
  key = (key << 1) | (s.frozen[0] ? 1 : 0);
  key = (key << 1) | (s.frozen[1] ? 1 : 0);
  key = (key << 1) | (s.done ? 1 : 0);
  return key;
}

struct MemoKey {
  std::uint64_t state;
  int t;
  bool operator==(const MemoKey&) const = default;
};

struct MemoKeyHash {
  std::size_t operator()(const MemoKey& k) const {
    return static_cast<std::size_t>(mix_seed(k.state, static_cast<std::uint64_t>(k.t)));
  }
};

struct NodeValue {
  std::array<double, 2> disc{0.0, 0.0};
  std::array<double, 2> undisc{0.0, 0.0};
  double mass = 0.0;
};

class ExactEvaluator {
 public:
  ExactEvaluator(const EnvConfig& config, ScriptedKind p0, ScriptedKind p1,
                 const ExactValueOptions& opts)
      : config_(config), kinds_{p0, p1}, opts_(opts) {
    if (config.width > 31 || config.height > 31) {
      throw std::invalid_argument("exact_value: grid too large to key states");
    }
  }

  NodeValue evaluate(const EnvState& start) { return expand(start, start.t); }

 private:
  NodeValue expand(const EnvState& state, int t) {
    if (state.done) return {};
    if (t >= opts_.horizon) {
      NodeValue leaf;
      leaf.mass = 1.0;
      return leaf;
    }
    const MemoKey key{pack_state(state), t};
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    if (memo_.size() >= opts_.memo_budget) {
      throw std::runtime_error("exact_value: memo budget exceeded");
    }

    const auto dist0 = state.frozen[0]
                           ? std::vector<std::pair<Action, double>>{{Action::kStay, 1.0}}
                           : scripted_distribution(kinds_[0], state, 0);
    const auto dist1 = state.frozen[1]
                           ? std::vector<std::pair<Action, double>>{{Action::kStay, 1.0}}
                           : scripted_distribution(kinds_[1], state, 1);

    NodeValue node;
    for (const auto& [a0, p0] : dist0) {
      for (const auto& [a1, p1] : dist1) {
        // Stag branches: a Follows stag is deterministic given the moved
        // agents; a Random stag picks uniformly among the pre-step
        // neighbours.
        if (config_.stag_move == StagMode::kFollows) {
          accumulate(node, state, {a0, a1}, std::nullopt, p0 * p1, t);
        } else {
          const std::vector<GridPos> cells = stag_neighbors(state.stag, config_);
          const double pc = 1.0 / static_cast<double>(cells.size());
          for (const GridPos& dest : cells) {
            accumulate(node, state, {a0, a1}, dest, p0 * p1 * pc, t);
          }
        }
      }
    }
    memo_.emplace(key, node);
    return node;
  }

  void accumulate(NodeValue& node, const EnvState& state, const std::array<Action, 2>& actions,
                  std::optional<GridPos> dest, double prob, int t) {
    if (prob == 0.0) return;
    EnvState child = state;
    StepResult sr;
    if (dest) {
      sr = step_with_stag_dest(child, actions, config_, *dest);
    } else {
      Rng unused(0);
      sr = step(child, actions, config_, unused);
    }
    const NodeValue sub = expand(child, t + 1);
    for (int i = 0; i < 2; ++i) {
      node.disc[i] += prob * (sr.rewards[i] + opts_.gamma * sub.disc[i]);
      node.undisc[i] += prob * (sr.rewards[i] + sub.undisc[i]);
    }
    node.mass += prob * sub.mass;
  }

  EnvConfig config_;
  std::array<ScriptedKind, 2> kinds_;
  ExactValueOptions opts_;
  std::unordered_map<MemoKey, NodeValue, MemoKeyHash> memo_;
};

ExactValue to_exact_value(const NodeValue& node, const ExactValueOptions& opts) {
  ExactValue v;
  v.discounted = node.disc;
  v.undiscounted = node.undisc;
  v.horizon = opts.horizon;
  v.truncation_mass = node.mass;
  return v;
}

}  // namespace

ExactValue exact_value(const EnvConfig& config, ScriptedKind policy0, ScriptedKind policy1,
                       const EnvState& start, const ExactValueOptions& opts) {
  validate(config);
  ExactEvaluator eval(config, policy0, policy1, opts);
  return to_exact_value(eval.evaluate(start), opts);
}

std::vector<std::pair<EnvState, double>> enumerate_spawns(const EnvConfig& config,
                                                          std::size_t budget) {
  validate(config);
  std::vector<std::pair<EnvState, double>> out;

  std::vector<bool> occupied(config.width * config.height, false);
  EnvState base;
  auto claim = [&](GridPos p) { occupied[p.y * config.width + p.x] = true; };
  if (config.agent_spawn == SpawnMode::kFixed) {
    base.agents[0] = GridPos{0, 0};
    base.agents[1] = GridPos{config.width - 1, 0};
    claim(base.agents[0]);
    claim(base.agents[1]);
  }
  if (config.stag_spawn == SpawnMode::kFixed) {
    base.stag = GridPos{config.width / 2, config.height / 2};
    claim(base.stag);
  }

  // Remaining entities draw uniformly from free cells, in reset order.
  std::vector<GridPos*> pending;
  if (config.agent_spawn == SpawnMode::kRandom) {
    pending.push_back(&base.agents[0]);
    pending.push_back(&base.agents[1]);
  }
  if (config.stag_spawn == SpawnMode::kRandom) pending.push_back(&base.stag);
  pending.push_back(&base.plants[0]);
  pending.push_back(&base.plants[1]);

  auto recurse = [&](auto&& self, std::size_t k, double prob) -> void {
    if (k == pending.size()) {
      out.emplace_back(base, prob);
      if (out.size() > budget) throw std::runtime_error("enumerate_spawns: budget exceeded");
      return;
    }
    int free_count = 0;
    for (bool o : occupied) free_count += o ? 0 : 1;
    for (int y = 0; y < config.height; ++y) {
      for (int x = 0; x < config.width; ++x) {
        if (occupied[y * config.width + x]) continue;
        *pending[k] = GridPos{x, y};
        occupied[y * config.width + x] = true;
        self(self, k + 1, prob / free_count);
        occupied[y * config.width + x] = false;
      }
    }
  };
  recurse(recurse, 0, 1.0);
  return out;
}

ExactValue exact_value_over_spawns(const EnvConfig& config, ScriptedKind policy0,
                                   ScriptedKind policy1, const ExactValueOptions& opts) {
  const auto spawns = enumerate_spawns(config);
  ExactValue total;
  total.horizon = opts.horizon;
  for (const auto& [start, prob] : spawns) {
    const ExactValue v = exact_value(config, policy0, policy1, start, opts);
    for (int i = 0; i < 2; ++i) {
      total.discounted[i] += prob * v.discounted[i];
      total.undiscounted[i] += prob * v.undiscounted[i];
    }
    total.truncation_mass += prob * v.truncation_mass;
  }
  return total;
}

EpisodeOutcome play_episode(const AgentPolicy& policy0, const AgentPolicy& policy1,
                            const EnvConfig& config, Rng& spawn_rng, Rng& stag_rng,
                            Rng& sampling_rng, double gamma, int max_steps) {
  EnvState state = reset(config, spawn_rng);
  EpisodeOutcome out;
  std::array<double, 2> terminal_reward{0.0, 0.0};
  std::array<bool, 2> got_terminal{false, false};
  double factor = 1.0;
  while (!state.done && out.steps < max_steps) {
    std::array<Action, 2> actions{Action::kStay, Action::kStay};
    if (!state.frozen[0]) actions[0] = policy0.act(state, 0, config, sampling_rng);
    if (!state.frozen[1]) actions[1] = policy1.act(state, 1, config, sampling_rng);
    const StepResult sr = step(state, actions, config, stag_rng);
    for (int i = 0; i < 2; ++i) {
      out.returns[i] += sr.rewards[i];
      out.discounted[i] += factor * sr.rewards[i];
      if (sr.newly_frozen[i]) {
        terminal_reward[i] = sr.rewards[i];
        got_terminal[i] = true;
      }
    }
    factor *= gamma;
    ++out.steps;
    if (sr.done) {
      out.truncated = sr.truncated;
      break;
    }
  }
  if (!state.done) out.truncated = true;  // stopped by the step cap
  out.joint_hunt = got_terminal[0] && got_terminal[1] &&
                   terminal_reward[0] == config.payoffs.h &&
                   terminal_reward[1] == config.payoffs.h;
  return out;
}

MonteCarloValue monte_carlo_value(const EnvConfig& config, const AgentPolicy& policy0,
                                  const AgentPolicy& policy1, int episodes, double gamma, Rng& rng,
                                  int max_steps) {
  if (episodes < 1) throw std::invalid_argument("monte_carlo_value: episodes must be >= 1");
  const std::uint64_t base = rng.next_u64();
  std::array<double, 2> sum{0.0, 0.0};
  std::array<double, 2> sum_sq{0.0, 0.0};
  for (int e = 0; e < episodes; ++e) {
    Rng episode_rng(mix_seed(base, static_cast<std::uint64_t>(e)));
    Rng spawn = episode_rng.fork(Stream::kSpawn);
    Rng stag = episode_rng.fork(Stream::kStagMove);
    Rng sampling = episode_rng.fork(Stream::kSampling);
    const EpisodeOutcome out =
        play_episode(policy0, policy1, config, spawn, stag, sampling, gamma, max_steps);
    for (int i = 0; i < 2; ++i) {
      sum[i] += out.discounted[i];
      sum_sq[i] += out.discounted[i] * out.discounted[i];
    }
  }
  MonteCarloValue mc;
  mc.episodes = episodes;
  for (int i = 0; i < 2; ++i) {
    mc.mean[i] = sum[i] / episodes;
    if (episodes > 1) {
      const double var = (sum_sq[i] - episodes * mc.mean[i] * mc.mean[i]) / (episodes - 1);
      mc.stderr_of_mean[i] = std::sqrt(std::max(var, 0.0) / episodes);
    }
  }
  return mc;
}

namespace {

std::string describe(const EnvState& s, const std::array<Action, 2>& actions, GridPos dest,
                     const char* what) {
  std::ostringstream os;
  os << what << " at a0=(" << s.agents[0].x << "," << s.agents[0].y << ") a1=(" << s.agents[1].x
     << "," << s.agents[1].y << ") stag=(" << s.stag.x << "," << s.stag.y << ") plants=("
     << s.plants[0].x << "," << s.plants[0].y << ")(" << s.plants[1].x << "," << s.plants[1].y
     << ") frozen=" << s.frozen[0] << s.frozen[1] << " actions=" << action_name(actions[0]) << ","
     << action_name(actions[1]) << " stag_dest=(" << dest.x << "," << dest.y << ")";
  return os.str();
}

bool outcomes_equal(const EnvState& env_next, const StepResult& env_sr, const OracleOutcome& oo) {
  return env_next == oo.next && env_sr.rewards == oo.rewards &&
         env_sr.newly_frozen == oo.newly_frozen && env_sr.done == oo.done &&
         env_sr.truncated == oo.truncated;
}

}  // namespace

EquivalenceReport transition_equivalence_check(const EnvConfig& config,
                                               std::size_t max_mismatch_reports) {
  EnvConfig c = config;
  c.time_limit.reset();  // stationary dynamics keep the reachable set finite
  validate(c);
  if (c.width > 16 || c.height > 16) {
    throw std::invalid_argument("transition_equivalence_check: grid too large to enumerate");
  }

  EquivalenceReport report;
  std::unordered_set<std::uint64_t> visited;
  std::deque<EnvState> queue;
  for (const auto& [state, prob] : enumerate_spawns(c)) {
    (void)prob;
    if (visited.insert(pack_state(state)).second) queue.push_back(state);
  }

  auto note_mismatch = [&](std::string text) {
    if (report.mismatches.size() < max_mismatch_reports) {
      report.mismatches.push_back(std::move(text));
    }
  };

  while (!queue.empty()) {
    const EnvState s = queue.front();
    queue.pop_front();
    ++report.states;

    for (int a0 = 0; a0 < kNumActions; ++a0) {
      for (int a1 = 0; a1 < kNumActions; ++a1) {
        const std::array<Action, 2> actions{static_cast<Action>(a0), static_cast<Action>(a1)};

        std::vector<std::optional<GridPos>> branches;
        if (c.stag_move == StagMode::kFollows) {
          branches.push_back(std::nullopt);
        } else {
          const std::vector<GridPos> env_cells = stag_neighbors(s.stag, c);
          const std::vector<GridPos> oracle_cells = oracle_stag_choices(s, c);
          if (env_cells != oracle_cells) {
            note_mismatch(describe(s, actions, s.stag, "stag option sets differ"));
          }
          for (const GridPos& cell : env_cells) branches.emplace_back(cell);
        }

        for (const std::optional<GridPos>& branch : branches) {
          EnvState env_next = s;
          StepResult env_sr;
          if (branch) {
            env_sr = step_with_stag_dest(env_next, actions, c, *branch);
          } else {
            Rng unused(0);
            env_sr = step(env_next, actions, c, unused);
          }
          const OracleOutcome oo = oracle_transition(s, actions, c, branch);
          ++report.transitions;
          if (!outcomes_equal(env_next, env_sr, oo)) {
            note_mismatch(describe(s, actions, branch.value_or(oo.next.stag), "outcomes differ"));
          }

          if (!env_next.done) {
            EnvState successor = env_next;
            successor.t = 0;  // dynamics are time-invariant without a limit
            if (visited.insert(pack_state(successor)).second) queue.push_back(successor);
          }
        }
      }
    }
  }
  return report;
}

}  // namespace staghunt
