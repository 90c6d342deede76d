#include "staghunt/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace staghunt {

void validate(const Hyperparams& hp) {
  if (!(hp.discount > 0.0 && hp.discount <= 1.0)) {
    throw std::invalid_argument("Hyperparams: discount must be in (0, 1]");
  }
  if (!(hp.gae_lambda >= 0.0 && hp.gae_lambda <= 1.0)) {
    throw std::invalid_argument("Hyperparams: gae_lambda must be in [0, 1]");
  }
  if (!(hp.clip > 0.0)) throw std::invalid_argument("Hyperparams: clip must be positive");
  if (hp.train_batch <= 0 || hp.sgd_minibatch <= 0 || hp.sgd_iters <= 0) {
    throw std::invalid_argument("Hyperparams: batch sizes and sgd_iters must be positive");
  }
  if (hp.sgd_minibatch > hp.train_batch) {
    throw std::invalid_argument("Hyperparams: sgd_minibatch must not exceed train_batch");
  }
  if (hp.vf_clip <= 0.0 || hp.kl_coeff < 0.0 || hp.kl_target <= 0.0) {
    throw std::invalid_argument("Hyperparams: vf_clip/kl settings out of range");
  }
}

GaeResult compute_gae(const Eigen::VectorXd& rewards, const Eigen::VectorXd& values,
                      const std::vector<FragmentEnd>& ends, const Eigen::VectorXd& tail_values,
                      double gamma, double lambda) {
  const int n = static_cast<int>(rewards.size());
  if (values.size() != n || static_cast<int>(ends.size()) != n || tail_values.size() != n) {
    throw std::invalid_argument("compute_gae: array lengths differ");
  }
  if (n == 0) return {};
  if (ends.back() == FragmentEnd::kNone) {
    throw std::invalid_argument("compute_gae: last row must close its fragment");
  }
  GaeResult out;
  out.advantages.resize(n);
  out.returns.resize(n);
  double carry = 0.0;
  for (int t = n - 1; t >= 0; --t) {
    double next_value = 0.0;
    bool continues = false;
    switch (ends[t]) {
      case FragmentEnd::kTerminal: break;
      case FragmentEnd::kBootstrap: next_value = tail_values(t); break;
      case FragmentEnd::kNone:
        next_value = values(t + 1);
        continues = true;
        break;
    }
    const double delta = rewards(t) + gamma * next_value - values(t);
    carry = delta + (continues ? gamma * lambda * carry : 0.0);
    out.advantages(t) = carry;
    out.returns(t) = carry + values(t);
  }
  if (!out.advantages.allFinite()) throw std::runtime_error("compute_gae: non-finite advantage");
  return out;
}

void compute_gae_into(RolloutBatch& batch, double gamma, double lambda) {
  GaeResult g = compute_gae(batch.rewards, batch.values, batch.ends, batch.tail_values, gamma,
                            lambda);
  batch.advantages = std::move(g.advantages);
  batch.returns = std::move(g.returns);
}

MlpGrads zero_grads(const MlpParams& params) {
  return {zero_grads_like(params.actor), zero_grads_like(params.critic)};
}

namespace {

void set_zero(NetGrads& g) {
  for (Linear& layer : g.layers) {
    layer.w.setZero();
    layer.b.setZero();
  }
}

}  // namespace

LossStats ppo_loss_and_grad(const MlpParams& params, const RolloutBatch& batch,
                            std::span<const int> idx, const Hyperparams& hp, double kl_coeff,
                            MlpGrads& grads) {
  const int n = static_cast<int>(idx.size());
  if (n == 0) throw std::invalid_argument("ppo_loss_and_grad: empty minibatch");
  set_zero(grads.actor);
  set_zero(grads.critic);

  const int obs_dim = params.dims.obs_dim;
  const int n_actions = params.dims.n_actions;

  Eigen::MatrixXd x(n, obs_dim);
  Eigen::MatrixXd behaviour_logits(n, n_actions);
  Eigen::VectorXd behaviour_logp(n), adv(n), ret(n);
  Eigen::VectorXi act(n);
  for (int i = 0; i < n; ++i) {
    const int r = idx[i];
    x.row(i) = batch.obs.row(r);
    behaviour_logits.row(i) = batch.behaviour_logits.row(r);
    behaviour_logp(i) = batch.behaviour_logp(r);
    adv(i) = batch.advantages(r);
    ret(i) = batch.returns(r);
    act(i) = batch.actions(r);
  }

  NetCache actor_cache, critic_cache;
  const Eigen::MatrixXd& logits = net_forward(params.actor, x, actor_cache);
  const Eigen::MatrixXd& value_col = net_forward(params.critic, x, critic_cache);

  // Shifted log-softmax of the current policy.
  const Eigen::VectorXd row_max = logits.rowwise().maxCoeff();
  Eigen::MatrixXd log_p = logits.colwise() - row_max;
  const Eigen::VectorXd log_sum = log_p.array().exp().rowwise().sum().log();
  log_p.colwise() -= log_sum;
  const Eigen::MatrixXd p = log_p.array().exp();

  // Behaviour distribution, for the exact KL penalty.
  const Eigen::VectorXd b_row_max = behaviour_logits.rowwise().maxCoeff();
  Eigen::MatrixXd b_log_p = behaviour_logits.colwise() - b_row_max;
  const Eigen::VectorXd b_log_sum = b_log_p.array().exp().rowwise().sum().log();
  b_log_p.colwise() -= b_log_sum;
  const Eigen::MatrixXd b_p = b_log_p.array().exp();

  Eigen::MatrixXd d_logits = Eigen::MatrixXd::Zero(n, n_actions);
  Eigen::MatrixXd d_value(n, 1);

  const double inv_n = 1.0 / n;
  const double clip_lo = 1.0 - hp.clip;
  const double clip_hi = 1.0 + hp.clip;
  const double vf_cap = hp.vf_clip * hp.vf_clip;

  double surrogate_sum = 0.0, vf_sum = 0.0, entropy_sum = 0.0, kl_sum = 0.0;
  int clipped = 0;
  for (int i = 0; i < n; ++i) {
    const int a = act(i);
    const double logp_new = log_p(i, a);
    const double rho = std::exp(logp_new - behaviour_logp(i));
    const double surr1 = rho * adv(i);
    const double rho_clipped = std::clamp(rho, clip_lo, clip_hi);
    const double surr2 = rho_clipped * adv(i);
    if (surr1 <= surr2) {
      surrogate_sum += surr1;
      const double coeff = -adv(i) * rho * inv_n;
      d_logits.row(i) += coeff * (-p.row(i));
      d_logits(i, a) += coeff;
    } else {
      // Clipped branch active: constant in the policy parameters.
      surrogate_sum += surr2;
      ++clipped;
    }

    const double err = value_col(i, 0) - ret(i);
    const double sq = err * err;
    if (sq < vf_cap) {
      vf_sum += sq;
      d_value(i, 0) = hp.vf_loss_coeff * 2.0 * err * inv_n;
    } else {
      vf_sum += vf_cap;
      d_value(i, 0) = 0.0;
    }

    const double h = -(p.row(i).array() * log_p.row(i).array()).sum();
    entropy_sum += h;
    if (hp.entropy_coeff != 0.0) {
      d_logits.row(i).array() +=
          (hp.entropy_coeff * inv_n) * p.row(i).array() * (log_p.row(i).array() + h);
    }

    const double kl = (b_p.row(i).array() * (b_log_p.row(i) - log_p.row(i)).array()).sum();
    kl_sum += kl;
    if (kl_coeff != 0.0) {
      d_logits.row(i) += (kl_coeff * inv_n) * (p.row(i) - b_p.row(i));
    }
  }

  LossStats stats;
  stats.policy_loss = -surrogate_sum * inv_n;
  stats.value_loss = hp.vf_loss_coeff * vf_sum * inv_n;
  stats.entropy = entropy_sum * inv_n;
  stats.kl = kl_sum * inv_n;
  stats.clip_fraction = static_cast<double>(clipped) * inv_n;
  stats.loss = stats.policy_loss + stats.value_loss - hp.entropy_coeff * stats.entropy +
               kl_coeff * stats.kl;
  if (!std::isfinite(stats.loss)) {
    std::ostringstream msg;
    msg << "ppo_loss_and_grad: non-finite loss (policy=" << stats.policy_loss
        << " value=" << stats.value_loss << " entropy=" << stats.entropy << " kl=" << stats.kl
        << ")";
    throw std::runtime_error(msg.str());
  }

  net_backward(params.actor, actor_cache, d_logits, grads.actor);
  net_backward(params.critic, critic_cache, d_value, grads.critic);
  return stats;
}

double adapt_kl_coeff(double kl_coeff, double measured_kl, double kl_target) {
  if (kl_coeff <= 0.0) throw std::invalid_argument("adapt_kl_coeff: coefficient must be positive");
  if (measured_kl > 2.0 * kl_target) return kl_coeff * 1.5;
  if (measured_kl < kl_target / 2.0) return kl_coeff * 0.5;
  return kl_coeff;
}

AdamState make_adam_state(const MlpParams& params) {
  return {zero_grads(params), zero_grads(params), 0};
}

void adam_step(MlpParams& params, const MlpGrads& grads, AdamState& state,
               const Hyperparams& hp) {
  state.step += 1;
  const double bc1 = 1.0 - std::pow(hp.adam_beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(hp.adam_beta2, static_cast<double>(state.step));

  auto update = [&](auto& theta, const auto& g, auto& m, auto& v) {
    m = hp.adam_beta1 * m + (1.0 - hp.adam_beta1) * g;
    v = (hp.adam_beta2 * v.array() + (1.0 - hp.adam_beta2) * g.array().square()).matrix();
    theta.array() -=
        hp.learning_rate * (m.array() / bc1) / ((v.array() / bc2).sqrt() + hp.adam_epsilon);
  };
  auto walk = [&](Net& net, const NetGrads& g, NetGrads& m, NetGrads& v) {
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      update(net.layers[l].w, g.layers[l].w, m.layers[l].w, v.layers[l].w);
      update(net.layers[l].b, g.layers[l].b, m.layers[l].b, v.layers[l].b);
    }
  };
  walk(params.actor, grads.actor, state.m.actor, state.v.actor);
  walk(params.critic, grads.critic, state.m.critic, state.v.critic);
}

void standardize_advantages(RolloutBatch& batch) {
  const int n = batch.size();
  if (n == 0) return;
  const double mean = batch.advantages.mean();
  const double var = (batch.advantages.array() - mean).square().mean();
  batch.advantages = (batch.advantages.array() - mean) / (std::sqrt(var) + 1e-8);
}

// --- rollout collection ---

namespace {

/// Column-store accumulator for one agent's decision rows.
struct BatchBuilder {
  int obs_dim = 0;
  int n_actions = 0;
  std::vector<double> obs;
  std::vector<int> actions;
  std::vector<double> logits;
  std::vector<double> logp;
  std::vector<double> rewards;
  std::vector<double> values;
  std::vector<double> tails;
  std::vector<FragmentEnd> ends;

  BatchBuilder(int od, int na) : obs_dim(od), n_actions(na) {}

  int size() const { return static_cast<int>(actions.size()); }

  void push_decision(const double* o, int action, double lp, const double* lg, double value) {
    obs.insert(obs.end(), o, o + obs_dim);
    actions.push_back(action);
    logits.insert(logits.end(), lg, lg + n_actions);
    logp.push_back(lp);
    values.push_back(value);
    rewards.push_back(0.0);
    tails.push_back(0.0);
    ends.push_back(FragmentEnd::kNone);
  }

  void close_last(double reward, FragmentEnd end, double tail) {
    rewards.back() = reward;
    ends.back() = end;
    tails.back() = tail;
  }

  /// Packs the first n rows. A fragment cut by the boundary bootstraps with
  /// the recorded value of the first dropped row.
  RolloutBatch take(int n) {
    if (size() < n) throw std::logic_error("BatchBuilder: not enough rows");
    if (size() > n && ends[n - 1] == FragmentEnd::kNone) {
      ends[n - 1] = FragmentEnd::kBootstrap;
      tails[n - 1] = values[n];
    }
    if (ends[n - 1] == FragmentEnd::kNone) {
      throw std::logic_error("BatchBuilder: open fragment at batch boundary");
    }
    RolloutBatch b;
    b.obs = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        obs.data(), n, obs_dim);
    b.behaviour_logits =
        Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            logits.data(), n, n_actions);
    b.actions = Eigen::Map<Eigen::VectorXi>(actions.data(), n);
    b.behaviour_logp = Eigen::Map<Eigen::VectorXd>(logp.data(), n);
    b.rewards = Eigen::Map<Eigen::VectorXd>(rewards.data(), n);
    b.values = Eigen::Map<Eigen::VectorXd>(values.data(), n);
    b.tail_values = Eigen::Map<Eigen::VectorXd>(tails.data(), n);
    b.ends.assign(ends.begin(), ends.begin() + n);
    return b;
  }
};

/// Single-observation forward pass with reused caches.
class Inference {
 public:
  explicit Inference(const MlpParams& params) : params_(&params), input_(1, params.dims.obs_dim) {}

  void eval(const Eigen::VectorXd& obs) {
    input_.row(0) = obs.transpose();
    logits_ = net_forward(params_->actor, input_, actor_cache_).row(0).transpose();
    value_ = net_forward(params_->critic, input_, critic_cache_)(0, 0);
  }

  double value_of(const Eigen::VectorXd& obs) {
    input_.row(0) = obs.transpose();
    return net_forward(params_->critic, input_, critic_cache_)(0, 0);
  }

  const Eigen::VectorXd& logits() const { return logits_; }
  double value() const { return value_; }

 private:
  const MlpParams* params_;
  Eigen::MatrixXd input_;
  NetCache actor_cache_;
  NetCache critic_cache_;
  Eigen::VectorXd logits_;
  double value_ = 0.0;
};

Eigen::VectorXd to_vector(const Observation& obs) {
  Eigen::VectorXd v(kObsDim);
  for (int i = 0; i < kObsDim; ++i) v(i) = obs[i];
  return v;
}

struct EpisodeTally {
  std::vector<double> combined;
  std::vector<std::array<double, 2>> per_agent;
  int truncated = 0;

  void finish(const std::array<double, 2>& returns, bool was_truncated) {
    if (was_truncated) {
      ++truncated;
      return;
    }
    combined.push_back(returns[0] + returns[1]);
    per_agent.push_back(returns);
  }

  IterationStats stats(const EnvConfig& config) const {
    IterationStats s;
    s.truncated = truncated;
    s.episodes = static_cast<int>(combined.size());
    if (s.episodes == 0) return s;
    double sum = 0.0;
    for (double c : combined) sum += c;
    s.mean_combined = sum / s.episodes;
    double var = 0.0;
    for (double c : combined) var += (c - s.mean_combined) * (c - s.mean_combined);
    s.std_combined = std::sqrt(var / s.episodes);
    for (const auto& pa : per_agent) {
      s.agent0_mean += pa[0];
      s.agent1_mean += pa[1];
    }
    s.agent0_mean /= s.episodes;
    s.agent1_mean /= s.episodes;

    // Sanity rails implied by the reward structure.
    const double limit = config.time_limit ? static_cast<double>(*config.time_limit) : 0.0;
    const double floor = 2.0 * std::min(config.payoffs.m, 0.0) +
                         2.0 * limit * std::min(config.step_penalty, 0.0);
    const double ceil = 2.0 * config.payoffs.h;
    if (s.mean_combined < floor - 1e-9 || s.mean_combined > ceil + 1e-9) {
      throw std::logic_error("IterationStats: mean combined reward out of bounds");
    }
    return s;
  }
};

}  // namespace

RolloutWorker::RolloutWorker(EnvConfig config, Rng spawn_rng, Rng stag_rng, Rng sampling_rng)
    : config_(std::move(config)),
      spawn_rng_(spawn_rng),
      stag_rng_(stag_rng),
      sampling_rng_(sampling_rng) {
  validate(config_);
  if (!config_.time_limit) {
    throw std::invalid_argument("RolloutWorker: training requires a time limit");
  }
}

std::array<RolloutBatch, 2> RolloutWorker::collect_ippo(const MlpParams& policy0,
                                                        const MlpParams& policy1, int train_batch,
                                                        IterationStats& stats) {
  std::array<BatchBuilder, 2> builders{BatchBuilder(kObsDim, kNumActions),
                                       BatchBuilder(kObsDim, kNumActions)};
  std::array<Inference, 2> infer{Inference(policy0), Inference(policy1)};
  EpisodeTally tally;

  while (std::min(builders[0].size(), builders[1].size()) < train_batch) {
    if (!episode_live_) {
      state_ = reset(config_, spawn_rng_);
      episode_return_ = {0.0, 0.0};
      episode_live_ = true;
    }

    std::array<Action, 2> actions{Action::kStay, Action::kStay};
    std::array<bool, 2> decided{false, false};
    for (int i = 0; i < 2; ++i) {
      if (state_.frozen[i]) continue;
      const Eigen::VectorXd obs = to_vector(observe(state_, i, config_));
      infer[i].eval(obs);
      ActionDistribution dist{infer[i].logits()};
      const auto [action, lp] = sample_action(dist, sampling_rng_);
      actions[i] = static_cast<Action>(action);
      builders[i].push_decision(obs.data(), action, lp, infer[i].logits().data(),
                                infer[i].value());
      decided[i] = true;
    }

    const StepResult sr = step(state_, actions, config_, stag_rng_);
    for (int i = 0; i < 2; ++i) {
      episode_return_[i] += sr.rewards[i];
      if (!decided[i]) continue;
      FragmentEnd end = FragmentEnd::kNone;
      double tail = 0.0;
      if (sr.newly_frozen[i]) {
        end = FragmentEnd::kTerminal;
      } else if (sr.truncated) {
        end = FragmentEnd::kBootstrap;
        tail = infer[i].value_of(to_vector(observe(state_, i, config_)));
      }
      builders[i].close_last(sr.rewards[i], end, tail);
    }

    if (sr.done) {
      tally.finish(episode_return_, sr.truncated);
      episode_live_ = false;
    }
  }

  // Close fragments that end exactly at the boundary mid-episode.
  for (int i = 0; i < 2; ++i) {
    if (builders[i].size() == train_batch && builders[i].ends.back() == FragmentEnd::kNone) {
      builders[i].ends.back() = FragmentEnd::kBootstrap;
      builders[i].tails.back() = infer[i].value_of(to_vector(observe(state_, i, config_)));
    }
  }

  stats = tally.stats(config_);
  return {builders[0].take(train_batch), builders[1].take(train_batch)};
}

int encode_joint(Action a0, Action a1) {
  return static_cast<int>(a0) * kNumActions + static_cast<int>(a1);
}

std::array<Action, 2> decode_joint(int joint) {
  if (joint < 0 || joint >= kJointActions) {
    throw std::invalid_argument("decode_joint: index out of range");
  }
  return {static_cast<Action>(joint / kNumActions), static_cast<Action>(joint % kNumActions)};
}

Eigen::VectorXd joint_observe(const EnvState& state, const EnvConfig& config) {
  const Observation o0 = observe(state, 0, config);
  const Observation o1 = observe(state, 1, config);
  Eigen::VectorXd v(kJointObsDim);
  for (int i = 0; i < kObsDim; ++i) {
    v(i) = o0[i];
    v(kObsDim + i) = o1[i];
  }
  return v;
}

RolloutBatch RolloutWorker::collect_central(const MlpParams& joint_policy, int train_batch,
                                            IterationStats& stats) {
  BatchBuilder builder(kJointObsDim, kJointActions);
  Inference infer(joint_policy);
  EpisodeTally tally;

  while (builder.size() < train_batch) {
    if (!episode_live_) {
      state_ = reset(config_, spawn_rng_);
      episode_return_ = {0.0, 0.0};
      episode_live_ = true;
    }

    const Eigen::VectorXd obs = joint_observe(state_, config_);
    infer.eval(obs);
    ActionDistribution dist{infer.logits()};
    const auto [joint_action, lp] = sample_action(dist, sampling_rng_);
    builder.push_decision(obs.data(), joint_action, lp, infer.logits().data(), infer.value());

    const StepResult sr = step(state_, decode_joint(joint_action), config_, stag_rng_);
    episode_return_[0] += sr.rewards[0];
    episode_return_[1] += sr.rewards[1];

    FragmentEnd end = FragmentEnd::kNone;
    double tail = 0.0;
    if (sr.done && !sr.truncated) {
      end = FragmentEnd::kTerminal;
    } else if (sr.truncated) {
      end = FragmentEnd::kBootstrap;
      tail = infer.value_of(joint_observe(state_, config_));
    }
    builder.close_last(sr.rewards[0] + sr.rewards[1], end, tail);

    if (sr.done) {
      tally.finish(episode_return_, sr.truncated);
      episode_live_ = false;
    }
  }

  if (builder.ends.back() == FragmentEnd::kNone) {
    builder.ends.back() = FragmentEnd::kBootstrap;
    builder.tails.back() = infer.value_of(joint_observe(state_, config_));
  }

  stats = tally.stats(config_);
  return builder.take(train_batch);
}

UpdateStats ppo_update(MlpParams& params, AdamState& adam, RolloutBatch& batch,
                       const Hyperparams& hp, double& kl_coeff, Rng& shuffle_rng) {
  standardize_advantages(batch);
  const int n = batch.size();
  std::vector<int> indices(n);
  std::iota(indices.begin(), indices.end(), 0);

  MlpGrads grads = zero_grads(params);
  double kl_sum = 0.0, clip_sum = 0.0, last_loss = 0.0;
  int minibatches = 0;
  for (int pass = 0; pass < hp.sgd_iters; ++pass) {
    shuffle_rng.shuffle(indices);
    for (int start = 0; start < n; start += hp.sgd_minibatch) {
      const int count = std::min(hp.sgd_minibatch, n - start);
      const LossStats ls = ppo_loss_and_grad(
          params, batch, std::span<const int>(indices.data() + start, count), hp, kl_coeff, grads);
      adam_step(params, grads, adam, hp);
      if (!all_finite(params)) {
        throw std::runtime_error("ppo_update: parameters became non-finite");
      }
      kl_sum += ls.kl;
      clip_sum += ls.clip_fraction;
      last_loss = ls.loss;
      ++minibatches;
    }
  }

  UpdateStats stats;
  stats.mean_kl = kl_sum / minibatches;
  stats.clip_fraction = clip_sum / minibatches;
  stats.final_loss = last_loss;
  kl_coeff = adapt_kl_coeff(kl_coeff, stats.mean_kl, hp.kl_target);
  return stats;
}

namespace {

TrainCurvePoint to_curve_point(int iteration, const IterationStats& st) {
  return TrainCurvePoint{iteration,   st.mean_combined, st.std_combined, st.agent0_mean,
                         st.agent1_mean, st.episodes,     st.truncated};
}

}  // namespace

IppoResult train_ippo(const EnvConfig& config, const Hyperparams& hp, const TrainOptions& opts) {
  validate(hp);
  validate(config);
  Rng root(opts.seed);
  RolloutWorker worker(config, root.fork(Stream::kSpawn), root.fork(Stream::kStagMove),
                       root.fork(Stream::kSampling));

  MlpConfig net = opts.net;
  net.obs_dim = kObsDim;
  net.n_actions = kNumActions;

  IppoResult result;
  if (opts.initial_policies) {
    result.policies = *opts.initial_policies;
  } else {
    Rng init = root.fork(Stream::kPolicyInit);
    Rng init0 = init.fork(0);
    Rng init1 = init.fork(1);
    result.policies = {init_params(init0, net), init_params(init1, net)};
  }

  std::array<AdamState, 2> adam{make_adam_state(result.policies[0]),
                                make_adam_state(result.policies[1])};
  std::array<double, 2> kl_coeff{hp.kl_coeff, hp.kl_coeff};
  Rng shuffle_root = root.fork(Stream::kShuffle);
  std::array<Rng, 2> shuffles{shuffle_root.fork(0), shuffle_root.fork(1)};

  for (int iter = 0; iter < opts.iterations; ++iter) {
    IterationStats st;
    auto batches = worker.collect_ippo(result.policies[0], result.policies[1], hp.train_batch, st);
    for (int agent = 0; agent < 2; ++agent) {
      compute_gae_into(batches[agent], hp.discount, hp.gae_lambda);
      ppo_update(result.policies[agent], adam[agent], batches[agent], hp, kl_coeff[agent],
                 shuffles[agent]);
    }
    result.curve.push_back(to_curve_point(iter, st));
    if (opts.on_iteration) opts.on_iteration(result.curve.back());
  }
  return result;
}

CentralResult train_centralized(const EnvConfig& config, const Hyperparams& hp,
                                const TrainOptions& opts) {
  validate(hp);
  validate(config);
  Rng root(opts.seed);
  RolloutWorker worker(config, root.fork(Stream::kSpawn), root.fork(Stream::kStagMove),
                       root.fork(Stream::kSampling));

  MlpConfig net = opts.net;
  net.obs_dim = kJointObsDim;
  net.n_actions = kJointActions;

  CentralResult result;
  Rng init = root.fork(Stream::kPolicyInit);
  Rng init0 = init.fork(0);
  result.policy = init_params(init0, net);

  AdamState adam = make_adam_state(result.policy);
  double kl_coeff = hp.kl_coeff;
  Rng shuffle_root = root.fork(Stream::kShuffle);
  Rng shuffle = shuffle_root.fork(0);

  for (int iter = 0; iter < opts.iterations; ++iter) {
    IterationStats st;
    RolloutBatch batch = worker.collect_central(result.policy, hp.train_batch, st);
    compute_gae_into(batch, hp.discount, hp.gae_lambda);
    ppo_update(result.policy, adam, batch, hp, kl_coeff, shuffle);
    result.curve.push_back(to_curve_point(iter, st));
    if (opts.on_iteration) opts.on_iteration(result.curve.back());
  }
  return result;
}

}  // namespace staghunt
