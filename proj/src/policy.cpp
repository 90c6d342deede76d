#include "staghunt/policy.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace staghunt {

namespace {

Linear init_layer(Rng& rng, int in, int out) {
  const double bound = std::sqrt(6.0 / (in + out));
  Linear layer;
  layer.w.resize(out, in);
  for (int o = 0; o < out; ++o) {
    for (int i = 0; i < in; ++i) {
      layer.w(o, i) = (2.0 * rng.uniform01() - 1.0) * bound;
    }
  }
  layer.b = Eigen::VectorXd::Zero(out);
  return layer;
}

Net init_net(Rng& rng, int in, int hidden, int out, double final_scale) {
  Net net;
  net.layers.push_back(init_layer(rng, in, hidden));
  net.layers.push_back(init_layer(rng, hidden, hidden));
  net.layers.push_back(init_layer(rng, hidden, out));
  net.layers.back().w *= final_scale;
  return net;
}

void check_dims(const MlpConfig& dims) {
  if (dims.obs_dim <= 0 || dims.hidden <= 0 || dims.n_actions <= 0) {
    throw std::invalid_argument("MlpConfig: all dimensions must be positive");
  }
}

}  // namespace

MlpParams init_params(Rng& rng, const MlpConfig& dims) {
  check_dims(dims);
  MlpParams p;
  p.dims = dims;
  p.actor = init_net(rng, dims.obs_dim, dims.hidden, dims.n_actions, 0.01);
  p.critic = init_net(rng, dims.obs_dim, dims.hidden, 1, 1.0);
  return p;
}

Eigen::VectorXd ActionDistribution::log_probs() const {
  const double shift = logits.maxCoeff();
  const Eigen::VectorXd shifted = logits.array() - shift;
  const double lse = std::log(shifted.array().exp().sum());
  return shifted.array() - lse;
}

Eigen::VectorXd ActionDistribution::probs() const { return log_probs().array().exp(); }

double ActionDistribution::log_prob(int action) const {
  if (action < 0 || action >= logits.size()) {
    throw std::invalid_argument("log_prob: action index out of range");
  }
  return log_probs()(action);
}

double ActionDistribution::entropy() const {
  const Eigen::VectorXd lp = log_probs();
  return -(lp.array().exp() * lp.array()).sum();
}

const Eigen::MatrixXd& net_forward(const Net& net, const Eigen::MatrixXd& input, NetCache& cache) {
  if (input.cols() != net.layers.front().w.cols()) {
    throw std::invalid_argument("net_forward: input width does not match obs_dim");
  }
  const std::size_t n_layers = net.layers.size();
  cache.acts.resize(n_layers + 1);
  cache.acts[0] = input;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const Linear& layer = net.layers[l];
    Eigen::MatrixXd& out = cache.acts[l + 1];
    out.noalias() = cache.acts[l] * layer.w.transpose();
    out.rowwise() += layer.b.transpose();
    if (l + 1 < n_layers) out = out.array().tanh();
  }
  return cache.acts.back();
}

void net_backward(const Net& net, const NetCache& cache, const Eigen::MatrixXd& d_out,
                  NetGrads& grads) {
  const int n_layers = static_cast<int>(net.layers.size());
  Eigen::MatrixXd delta = d_out;
  for (int l = n_layers - 1; l >= 0; --l) {
    grads.layers[l].w.noalias() += delta.transpose() * cache.acts[l];
    grads.layers[l].b.noalias() += delta.colwise().sum().transpose();
    if (l == 0) break;
    Eigen::MatrixXd next = delta * net.layers[l].w;
    // tanh' = 1 - a^2 on the activation that fed this layer.
    next.array() *= 1.0 - cache.acts[l].array().square();
    delta.swap(next);
  }
}

NetGrads zero_grads_like(const Net& net) {
  NetGrads g;
  g.layers.reserve(net.layers.size());
  for (const Linear& layer : net.layers) {
    g.layers.push_back({Eigen::MatrixXd::Zero(layer.w.rows(), layer.w.cols()),
                        Eigen::VectorXd::Zero(layer.b.size())});
  }
  return g;
}

std::pair<ActionDistribution, double> forward(const MlpParams& params,
                                              const Eigen::VectorXd& obs) {
  if (obs.size() != params.dims.obs_dim) {
    throw std::invalid_argument("forward: observation length does not match obs_dim");
  }
  NetCache cache;
  const Eigen::MatrixXd input = obs.transpose();
  ActionDistribution dist{net_forward(params.actor, input, cache).row(0).transpose()};
  const double value = net_forward(params.critic, input, cache)(0, 0);
  return {std::move(dist), value};
}

std::pair<ActionDistribution, double> forward(const MlpParams& params, const Observation& obs) {
  Eigen::VectorXd v(kObsDim);
  for (int i = 0; i < kObsDim; ++i) v(i) = obs[i];
  return forward(params, v);
}

std::pair<int, double> sample_action(const ActionDistribution& dist, Rng& rng) {
  const Eigen::VectorXd lp = dist.log_probs();
  const Eigen::VectorXd p = lp.array().exp();
  const int action = rng.categorical(std::span<const double>(p.data(), p.size()));
  return {action, lp(action)};
}

int param_count(const Net& net) {
  int n = 0;
  for (const Linear& layer : net.layers) {
    n += static_cast<int>(layer.w.size() + layer.b.size());
  }
  return n;
}

int param_count(const MlpParams& params) {
  return param_count(params.actor) + param_count(params.critic);
}

namespace {

template <typename Fn>
void for_each_layer(MlpParams& params, Fn&& fn) {
  for (Linear& layer : params.actor.layers) fn(layer);
  for (Linear& layer : params.critic.layers) fn(layer);
}

template <typename Fn>
void for_each_layer(const MlpParams& params, Fn&& fn) {
  for (const Linear& layer : params.actor.layers) fn(layer);
  for (const Linear& layer : params.critic.layers) fn(layer);
}

}  // namespace

Eigen::VectorXd flatten(const MlpParams& params) {
  Eigen::VectorXd flat(param_count(params));
  int k = 0;
  for_each_layer(params, [&](const Linear& layer) {
    for (int o = 0; o < layer.w.rows(); ++o) {
      for (int i = 0; i < layer.w.cols(); ++i) flat(k++) = layer.w(o, i);
    }
    for (int o = 0; o < layer.b.size(); ++o) flat(k++) = layer.b(o);
  });
  return flat;
}

void unflatten(const Eigen::VectorXd& flat, MlpParams& params) {
  if (flat.size() != param_count(params)) {
    throw std::invalid_argument("unflatten: size mismatch");
  }
  int k = 0;
  for_each_layer(params, [&](Linear& layer) {
    for (int o = 0; o < layer.w.rows(); ++o) {
      for (int i = 0; i < layer.w.cols(); ++i) layer.w(o, i) = flat(k++);
    }
    for (int o = 0; o < layer.b.size(); ++o) layer.b(o) = flat(k++);
  });
}

bool all_finite(const MlpParams& params) {
  bool ok = true;
  for_each_layer(params, [&](const Linear& layer) {
    ok = ok && layer.w.allFinite() && layer.b.allFinite();
  });
  return ok;
}

bool params_equal(const MlpParams& a, const MlpParams& b) {
  if (param_count(a) != param_count(b)) return false;
  const Eigen::VectorXd fa = flatten(a);
  const Eigen::VectorXd fb = flatten(b);
  return std::memcmp(fa.data(), fb.data(), sizeof(double) * fa.size()) == 0;
}

std::uint64_t params_hash(const MlpParams& params) {
  const Eigen::VectorXd flat = flatten(params);
  const auto* bytes = reinterpret_cast<const unsigned char*>(flat.data());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < sizeof(double) * flat.size(); ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

void save_checkpoint(const std::filesystem::path& path, const MlpParams& params,
                     const std::string& provenance) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path.string());
  const Eigen::VectorXd flat = flatten(params);
  out << "staghunt-checkpoint v1\n"
      << "obs_dim " << params.dims.obs_dim << "\n"
      << "hidden " << params.dims.hidden << "\n"
      << "n_actions " << params.dims.n_actions << "\n"
      << "activation tanh\n"
      << "provenance " << (provenance.empty() ? "-" : provenance) << "\n"
      << "doubles " << flat.size() << "\n";
  out.write(reinterpret_cast<const char*>(flat.data()),
            static_cast<std::streamsize>(sizeof(double) * flat.size()));
  if (!out) throw std::runtime_error("save_checkpoint: write failed for " + path.string());
}

MlpParams load_checkpoint(const std::filesystem::path& path, std::string* provenance) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "staghunt-checkpoint v1") {
    throw std::runtime_error("load_checkpoint: bad magic in " + path.string());
  }
  MlpConfig dims;
  long long n_doubles = -1;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "obs_dim") ls >> dims.obs_dim;
    else if (key == "hidden") ls >> dims.hidden;
    else if (key == "n_actions") ls >> dims.n_actions;
    else if (key == "activation") { std::string act; ls >> act;
      if (act != "tanh") throw std::runtime_error("load_checkpoint: unsupported activation " + act);
    } else if (key == "provenance") { std::string prov; ls >> prov;
      if (provenance) *provenance = prov == "-" ? "" : prov;
    } else if (key == "doubles") { ls >> n_doubles; break; }
    else throw std::runtime_error("load_checkpoint: unknown manifest key " + key);
  }
  check_dims(dims);

  // Allocate with the right shapes, then overwrite from the blob.
  Rng scratch(0);
  MlpParams params = init_params(scratch, dims);
  if (n_doubles != param_count(params)) {
    throw std::runtime_error("load_checkpoint: parameter count mismatch in " + path.string());
  }
  Eigen::VectorXd flat(n_doubles);
  in.read(reinterpret_cast<char*>(flat.data()),
          static_cast<std::streamsize>(sizeof(double) * n_doubles));
  if (in.gcount() != static_cast<std::streamsize>(sizeof(double) * n_doubles)) {
    throw std::runtime_error("load_checkpoint: truncated blob in " + path.string());
  }
  unflatten(flat, params);
  return params;
}

Action NeuralAgent::act(const EnvState& state, int agent_id, const EnvConfig& config,
                        Rng& rng) const {
  const auto [dist, value] = forward(params_, observe(state, agent_id, config));
  (void)value;
  return static_cast<Action>(sample_action(dist, rng).first);
}

}  // namespace staghunt
