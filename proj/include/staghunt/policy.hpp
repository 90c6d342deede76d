#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "staghunt/env.hpp"
#include "staghunt/rng.hpp"

namespace staghunt {

struct MlpConfig {
  int obs_dim = kObsDim;
  int hidden = 64;
  int n_actions = kNumActions;
};

/// One dense layer; weights are (out x in).
struct Linear {
  Eigen::MatrixXd w;
  Eigen::VectorXd b;
};

/// Feed-forward net with tanh hidden activations and a linear output layer.
struct Net {
  std::vector<Linear> layers;
};

/// Actor (obs -> hidden -> hidden -> action logits) and a separate critic
/// (obs -> hidden -> hidden -> 1). No shared trunk. All math is double
/// precision. Parameters are immutable snapshots for inference: any number of
/// threads may run forwards on the same instance; updates build a new one.
struct MlpParams {
  MlpConfig dims;
  Net actor;
  Net critic;
};

/// Xavier-uniform weights (+-sqrt(6/(fan_in+fan_out))), zero biases. The final
/// actor layer is scaled by 0.01 so the initial policy is near-uniform.
MlpParams init_params(Rng& rng, const MlpConfig& dims);

/// Categorical action distribution over logits.
struct ActionDistribution {
  Eigen::VectorXd logits;

  Eigen::VectorXd log_probs() const;  // shifted log-softmax, safe for |logit| <= 1e6
  Eigen::VectorXd probs() const;
  double log_prob(int action) const;
  double entropy() const;
};

/// Single-observation forward pass through both nets.
std::pair<ActionDistribution, double> forward(const MlpParams& params, const Observation& obs);
std::pair<ActionDistribution, double> forward(const MlpParams& params,
                                              const Eigen::VectorXd& obs);

/// Samples an action and returns it with its log-probability.
std::pair<int, double> sample_action(const ActionDistribution& dist, Rng& rng);

// --- batched forward/backward (the training path) ---

/// Per-layer activations kept for the backward pass. acts[0] is the input
/// batch; acts[l+1] the output of layer l (tanh applied except at the top).
struct NetCache {
  std::vector<Eigen::MatrixXd> acts;
};

/// Gradient holder with the same shapes as a Net.
struct NetGrads {
  std::vector<Linear> layers;
};

NetGrads zero_grads_like(const Net& net);

/// Rows of `input` are samples. Returns the batch output (rows = samples).
const Eigen::MatrixXd& net_forward(const Net& net, const Eigen::MatrixXd& input, NetCache& cache);

/// Accumulates parameter gradients for dL/d(output) in `d_out` (same shape as
/// the forward output) into `grads`.
void net_backward(const Net& net, const NetCache& cache, const Eigen::MatrixXd& d_out,
                  NetGrads& grads);

// --- parameter plumbing ---

int param_count(const Net& net);
int param_count(const MlpParams& params);

/// Flat layout: actor layers then critic layers; per layer the weight matrix
/// row by row (out-major) followed by the bias.
Eigen::VectorXd flatten(const MlpParams& params);
void unflatten(const Eigen::VectorXd& flat, MlpParams& params);

bool all_finite(const MlpParams& params);
bool params_equal(const MlpParams& a, const MlpParams& b);

/// FNV-1a over the flattened parameter bytes; used for checkpoint provenance.
std::uint64_t params_hash(const MlpParams& params);

/// Checkpoint file: a short ASCII manifest (format version, dims, activation,
/// provenance) followed by the flattened parameters as raw little-endian
/// 64-bit floats. load(save(p)) reproduces p bit-exactly.
void save_checkpoint(const std::filesystem::path& path, const MlpParams& params,
                     const std::string& provenance);
MlpParams load_checkpoint(const std::filesystem::path& path, std::string* provenance = nullptr);

/// Policy interface shared by neural and scripted agents: picks an action for
/// `agent_id` in `state`. Implementations must be safe to call concurrently.
class AgentPolicy {
 public:
  virtual ~AgentPolicy() = default;
  virtual Action act(const EnvState& state, int agent_id, const EnvConfig& config,
                     Rng& rng) const = 0;
};

/// Samples from the categorical distribution produced by an MLP snapshot.
class NeuralAgent : public AgentPolicy {
 public:
  explicit NeuralAgent(MlpParams params) : params_(std::move(params)) {}

  Action act(const EnvState& state, int agent_id, const EnvConfig& config,
             Rng& rng) const override;

  const MlpParams& params() const { return params_; }

 private:
  MlpParams params_;
};

}  // namespace staghunt
