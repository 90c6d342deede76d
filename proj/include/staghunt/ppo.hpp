#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "staghunt/env.hpp"
#include "staghunt/policy.hpp"
#include "staghunt/rng.hpp"

namespace staghunt {

struct Hyperparams {
  double clip = 0.3;
  double discount = 0.99;
  int train_batch = 4000;
  int sgd_minibatch = 128;
  int sgd_iters = 30;
  double kl_coeff = 0.2;
  double kl_target = 0.2;
  double entropy_coeff = 0.0;
  double vf_clip = 10.0;
  double vf_loss_coeff = 1.0;
  double gae_lambda = 1.0;
  double learning_rate = 5e-5;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
};

void validate(const Hyperparams& hp);

/// How a rollout row relates to the row after it. kTerminal closes a
/// trajectory fragment with no value to go; kBootstrap closes one whose tail
/// value is estimated by the critic (truncation or batch boundary); kNone
/// continues into the next row.
enum class FragmentEnd { kNone, kTerminal, kBootstrap };

/// Fixed-size buffer of one agent's decision steps for one update.
struct RolloutBatch {
  Eigen::MatrixXd obs;               // row per step
  Eigen::VectorXi actions;
  Eigen::MatrixXd behaviour_logits;  // sampling-time logits, for exact KL
  Eigen::VectorXd behaviour_logp;
  Eigen::VectorXd rewards;
  Eigen::VectorXd values;            // critic estimates at sampling time
  std::vector<FragmentEnd> ends;
  Eigen::VectorXd tail_values;       // V(s_next); used on kBootstrap rows only
  Eigen::VectorXd advantages;        // filled by compute_gae_into
  Eigen::VectorXd returns;

  int size() const { return static_cast<int>(rewards.size()); }
};

struct GaeResult {
  Eigen::VectorXd advantages;
  Eigen::VectorXd returns;
};

/// Generalized advantage estimation over a batch of trajectory fragments:
///   delta_t = r_t + gamma * V(s_{t+1}) * (1 - terminal_t) - V(s_t)
///   A_t     = delta_t + gamma * lambda * A_{t+1}   (reset at fragment ends)
/// V(s_{t+1}) is values[t+1] inside a fragment, tail_values[t] on a
/// bootstrapped end and 0 on a terminal end. Returns targets are A_t + V(s_t).
GaeResult compute_gae(const Eigen::VectorXd& rewards, const Eigen::VectorXd& values,
                      const std::vector<FragmentEnd>& ends, const Eigen::VectorXd& tail_values,
                      double gamma, double lambda);
void compute_gae_into(RolloutBatch& batch, double gamma, double lambda);

struct MlpGrads {
  NetGrads actor;
  NetGrads critic;
};
MlpGrads zero_grads(const MlpParams& params);

struct LossStats {
  double loss = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double kl = 0.0;            // mean KL(behaviour || current)
  double clip_fraction = 0.0;
};

/// Clipped-surrogate PPO loss over the minibatch rows `idx`, with analytic
/// gradients accumulated into `grads` (zeroed first):
///   loss = -mean(min(rho*A, clip(rho, 1-c, 1+c)*A))
///        + vf_loss_coeff * mean(min((V - R_target)^2, vf_clip^2))
///        - entropy_coeff * mean(H)
///        + kl_coeff * mean(KL(behaviour || current)).
/// Advantages must already be standardised. Throws on a non-finite loss.
LossStats ppo_loss_and_grad(const MlpParams& params, const RolloutBatch& batch,
                            std::span<const int> idx, const Hyperparams& hp, double kl_coeff,
                            MlpGrads& grads);

/// Adaptive KL penalty schedule: x1.5 above twice the target, x0.5 below half
/// of it, unchanged in between.
double adapt_kl_coeff(double kl_coeff, double measured_kl, double kl_target);

struct AdamState {
  MlpGrads m;
  MlpGrads v;
  long long step = 0;
};
AdamState make_adam_state(const MlpParams& params);

/// Bias-corrected Adam update (minimising, so parameters move against the
/// gradient).
void adam_step(MlpParams& params, const MlpGrads& grads, AdamState& state,
               const Hyperparams& hp);

/// In-batch standardisation used before the SGD passes: (A - mean) / (std + 1e-8).
void standardize_advantages(RolloutBatch& batch);

struct IterationStats {
  double mean_combined = 0.0;  // over episodes completed this iteration
  double std_combined = 0.0;
  double agent0_mean = 0.0;
  double agent1_mean = 0.0;
  int episodes = 0;
  int truncated = 0;
};

struct TrainCurvePoint {
  int iteration = 0;
  double mean_combined_reward = 0.0;
  double std_combined_reward = 0.0;
  double agent0_mean = 0.0;
  double agent1_mean = 0.0;
  int episodes = 0;
  int truncated = 0;
};
using TrainCurve = std::vector<TrainCurvePoint>;

/// Steps a persistent environment and fills fixed-size batches. Episodes
/// carry over between collections; stats cover episodes completed during the
/// call. Frozen agents contribute no decision rows.
class RolloutWorker {
 public:
  RolloutWorker(EnvConfig config, Rng spawn_rng, Rng stag_rng, Rng sampling_rng);

  /// Independent learners: one batch per agent, each exactly `train_batch`
  /// decision rows.
  std::array<RolloutBatch, 2> collect_ippo(const MlpParams& policy0, const MlpParams& policy1,
                                           int train_batch, IterationStats& stats);

  /// Fully centralised control: a single joint-action policy observing both
  /// agents (agent-0 order) and earning the summed reward.
  RolloutBatch collect_central(const MlpParams& joint_policy, int train_batch,
                               IterationStats& stats);

  const EnvConfig& config() const { return config_; }

 private:
  EnvConfig config_;
  Rng spawn_rng_;
  Rng stag_rng_;
  Rng sampling_rng_;
  EnvState state_{};
  bool episode_live_ = false;
  std::array<double, 2> episode_return_{0.0, 0.0};
};

// Joint-action codec for the centralised trainer: index = a0 * 5 + a1.
constexpr int kJointActions = kNumActions * kNumActions;
int encode_joint(Action a0, Action a1);
std::array<Action, 2> decode_joint(int joint);
constexpr int kJointObsDim = 2 * kObsDim;
Eigen::VectorXd joint_observe(const EnvState& state, const EnvConfig& config);

struct UpdateStats {
  double mean_kl = 0.0;
  double clip_fraction = 0.0;
  double final_loss = 0.0;
};

/// One PPO update: standardises advantages, then runs sgd_iters full passes
/// over shuffled minibatches, stepping Adam after each minibatch. `kl_coeff`
/// is adapted once at the end from the mean KL measured across the update.
/// The routine has no knowledge of agent identity.
UpdateStats ppo_update(MlpParams& params, AdamState& adam, RolloutBatch& batch,
                       const Hyperparams& hp, double& kl_coeff, Rng& shuffle_rng);

struct TrainOptions {
  MlpConfig net{};       // obs_dim/n_actions are overridden to fit the trainer
  int iterations = 1000;
  std::uint64_t seed = 0;
  /// Stage-2 resumption: start from these parameters instead of fresh
  /// initialisation (optimiser state is always fresh).
  std::optional<std::array<MlpParams, 2>> initial_policies;
  /// Called after each iteration, e.g. for progress logging.
  std::function<void(const TrainCurvePoint&)> on_iteration;
};

struct IppoResult {
  std::array<MlpParams, 2> policies;
  TrainCurve curve;
};

struct CentralResult {
  MlpParams policy;
  TrainCurve curve;
};

/// Independent PPO: two learners with disjoint parameters, each trained on
/// its own rewards from shared episodes.
IppoResult train_ippo(const EnvConfig& config, const Hyperparams& hp, const TrainOptions& opts);

/// Fully centralised PPO over the joint action space, trained on combined
/// reward.
CentralResult train_centralized(const EnvConfig& config, const Hyperparams& hp,
                                const TrainOptions& opts);

}  // namespace staghunt
