#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "staghunt/oracle.hpp"
#include "staghunt/ppo.hpp"
#include "staghunt/scripted.hpp"

using namespace staghunt;

namespace {

// Independent scalar recursion: splits the batch into fragments, then runs
// the textbook backward pass per fragment.
std::vector<double> gae_oracle(const std::vector<double>& rewards,
                               const std::vector<double>& values,
                               const std::vector<FragmentEnd>& ends,
                               const std::vector<double>& tails, double gamma, double lambda) {
  const int n = static_cast<int>(rewards.size());
  std::vector<double> adv(n, 0.0);
  int start = 0;
  while (start < n) {
    int stop = start;
    while (ends[stop] == FragmentEnd::kNone) ++stop;
    double carry = 0.0;
    for (int k = stop; k >= start; --k) {
      double next_value;
      if (k == stop) {
        next_value = ends[stop] == FragmentEnd::kTerminal ? 0.0 : tails[stop];
      } else {
        next_value = values[k + 1];
      }
      const double delta = rewards[k] + gamma * next_value - values[k];
      carry = delta + gamma * lambda * (k == stop ? 0.0 : carry);
      adv[k] = carry;
    }
    start = stop + 1;
  }
  return adv;
}

RolloutBatch make_batch(const std::vector<double>& rewards, const std::vector<double>& values,
                        const std::vector<FragmentEnd>& ends, const std::vector<double>& tails) {
  const int n = static_cast<int>(rewards.size());
  RolloutBatch b;
  b.rewards = Eigen::Map<const Eigen::VectorXd>(rewards.data(), n);
  b.values = Eigen::Map<const Eigen::VectorXd>(values.data(), n);
  b.tail_values = Eigen::Map<const Eigen::VectorXd>(tails.data(), n);
  b.ends = ends;
  return b;
}

// Synthetic on-policy batch: behaviour logits/log-probs come from the same
// parameters, so importance ratios are exactly one.
RolloutBatch synthetic_batch(const MlpParams& params, int n, Rng& rng, double reward_scale = 5.0) {
  const int obs_dim = params.dims.obs_dim;
  const int n_actions = params.dims.n_actions;
  RolloutBatch b;
  b.obs.resize(n, obs_dim);
  b.behaviour_logits.resize(n, n_actions);
  b.actions.resize(n);
  b.behaviour_logp.resize(n);
  b.rewards.resize(n);
  b.values.resize(n);
  b.tail_values = Eigen::VectorXd::Zero(n);
  b.ends.assign(n, FragmentEnd::kNone);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd obs(obs_dim);
    for (int k = 0; k < obs_dim; ++k) obs(k) = rng.uniform01();
    const auto [dist, value] = forward(params, obs);
    const auto [action, logp] = sample_action(dist, rng);
    b.obs.row(i) = obs.transpose();
    b.behaviour_logits.row(i) = dist.logits.transpose();
    b.actions(i) = action;
    b.behaviour_logp(i) = logp;
    b.values(i) = value;
    b.rewards(i) = (rng.uniform01() - 0.3) * reward_scale;
    if (i % 7 == 6) b.ends[i] = FragmentEnd::kTerminal;
  }
  b.ends[n - 1] = FragmentEnd::kTerminal;
  return b;
}

}  // namespace

TEST_CASE("compute_gae reproduces the frozen hand recursion") {
  // rewards [0,0,25], values [1,1,1], gamma 0.99, lambda 1, terminal end:
  //   A2 = 25 - 1 = 24
  //   A1 = (0 + 0.99*1 - 1) + 0.99*24   = 23.75
  //   A0 = (0 + 0.99*1 - 1) + 0.99*23.75 = 23.5025
  const std::vector<double> rewards{0, 0, 25};
  const std::vector<double> values{1, 1, 1};
  const std::vector<FragmentEnd> ends{FragmentEnd::kNone, FragmentEnd::kNone,
                                      FragmentEnd::kTerminal};
  const std::vector<double> tails{0, 0, 0};
  const GaeResult g = compute_gae(
      Eigen::Map<const Eigen::VectorXd>(rewards.data(), 3),
      Eigen::Map<const Eigen::VectorXd>(values.data(), 3), ends,
      Eigen::Map<const Eigen::VectorXd>(tails.data(), 3), 0.99, 1.0);
  CHECK(std::abs(g.advantages(2) - 24.0) < 1e-12);
  CHECK(std::abs(g.advantages(1) - 23.75) < 1e-12);
  CHECK(std::abs(g.advantages(0) - 23.5025) < 1e-12);
  for (int t = 0; t < 3; ++t) {
    CHECK(g.returns(t) == doctest::Approx(g.advantages(t) + values[t]).epsilon(1e-15));
  }

  const std::vector<double> oracle = gae_oracle(rewards, values, ends, tails, 0.99, 1.0);
  for (int t = 0; t < 3; ++t) CHECK(std::abs(g.advantages(t) - oracle[t]) < 1e-12);
}

TEST_CASE("compute_gae matches the scalar oracle on random fragmented batches") {
  Rng rng(41);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + rng.uniform_int(40);
    std::vector<double> rewards(n), values(n), tails(n, 0.0);
    std::vector<FragmentEnd> ends(n, FragmentEnd::kNone);
    for (int i = 0; i < n; ++i) {
      rewards[i] = (rng.uniform01() - 0.5) * 50;
      values[i] = (rng.uniform01() - 0.5) * 20;
      const int r = rng.uniform_int(5);
      if (r == 0) ends[i] = FragmentEnd::kTerminal;
      if (r == 1) {
        ends[i] = FragmentEnd::kBootstrap;
        tails[i] = (rng.uniform01() - 0.5) * 20;
      }
    }
    if (ends[n - 1] == FragmentEnd::kNone) ends[n - 1] = FragmentEnd::kBootstrap;
    const double gamma = 0.8 + 0.2 * rng.uniform01();
    const double lambda = rng.uniform01();

    const RolloutBatch b = make_batch(rewards, values, ends, tails);
    const GaeResult g = compute_gae(b.rewards, b.values, b.ends, b.tail_values, gamma, lambda);
    const std::vector<double> oracle = gae_oracle(rewards, values, ends, tails, gamma, lambda);
    for (int t = 0; t < n; ++t) CHECK(std::abs(g.advantages(t) - oracle[t]) < 1e-12);
  }
}

TEST_CASE("gae with lambda=1 telescopes to returns-minus-values on terminal fragments") {
  Rng rng(43);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + rng.uniform_int(30);
    std::vector<double> rewards(n), values(n), tails(n, 0.0);
    std::vector<FragmentEnd> ends(n, FragmentEnd::kNone);
    ends[n - 1] = FragmentEnd::kTerminal;
    for (int i = 0; i < n; ++i) {
      rewards[i] = (rng.uniform01() - 0.5) * 50;
      values[i] = (rng.uniform01() - 0.5) * 20;
    }
    const double gamma = trial % 2 == 0 ? 1.0 : 0.97;
    const RolloutBatch b = make_batch(rewards, values, ends, tails);
    const GaeResult g = compute_gae(b.rewards, b.values, b.ends, b.tail_values, gamma, 1.0);
    for (int t = 0; t < n; ++t) {
      double ret = 0.0;
      double factor = 1.0;
      for (int k = t; k < n; ++k) {
        ret += factor * rewards[k];
        factor *= gamma;
      }
      CHECK(std::abs(g.advantages(t) - (ret - values[t])) < 1e-10);
    }
  }
}

TEST_CASE("gae with gamma=0 is the one-step residual") {
  const std::vector<double> rewards{3, -1, 7};
  const std::vector<double> values{1, 2, 3};
  const std::vector<FragmentEnd> ends{FragmentEnd::kNone, FragmentEnd::kNone,
                                      FragmentEnd::kTerminal};
  const std::vector<double> tails{0, 0, 0};
  const RolloutBatch b = make_batch(rewards, values, ends, tails);
  const GaeResult g = compute_gae(b.rewards, b.values, b.ends, b.tail_values, 0.0, 1.0);
  for (int t = 0; t < 3; ++t) {
    CHECK(g.advantages(t) == doctest::Approx(rewards[t] - values[t]).epsilon(1e-15));
  }
}

TEST_CASE("hyperparameter validation") {
  Hyperparams hp;
  CHECK_NOTHROW(validate(hp));
  hp.discount = 0.0;
  CHECK_THROWS(validate(hp));
  hp = {};
  hp.gae_lambda = 1.2;
  CHECK_THROWS(validate(hp));
  hp = {};
  hp.sgd_minibatch = hp.train_batch + 1;
  CHECK_THROWS(validate(hp));
}

TEST_CASE("identity ratios make the surrogate vanish and the KL zero") {
  Rng rng(50);
  MlpParams params = init_params(rng, {6, 8, 4});
  RolloutBatch batch = synthetic_batch(params, 64, rng);
  compute_gae_into(batch, 0.99, 1.0);
  standardize_advantages(batch);

  std::vector<int> idx(batch.size());
  std::iota(idx.begin(), idx.end(), 0);
  Hyperparams hp;
  MlpGrads grads = zero_grads(params);
  const LossStats stats = ppo_loss_and_grad(params, batch, idx, hp, hp.kl_coeff, grads);
  CHECK(std::abs(stats.policy_loss) < 1e-9);
  CHECK(stats.kl == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(stats.clip_fraction == 0.0);
}

TEST_CASE("a saturated clip branch contributes no actor gradient") {
  Rng rng(51);
  MlpParams params = init_params(rng, {6, 8, 4});
  RolloutBatch batch = synthetic_batch(params, 2, rng);
  compute_gae_into(batch, 0.99, 1.0);
  Hyperparams hp;
  hp.vf_loss_coeff = 0.0;
  hp.entropy_coeff = 0.0;
  const double kl_coeff = 0.0;

  batch.advantages.setOnes();
  // Shift the behaviour log-prob so rho = 1 + 2*clip on both rows.
  for (int i = 0; i < 2; ++i) {
    batch.behaviour_logp(i) -= std::log(1.0 + 2.0 * hp.clip);
  }
  std::vector<int> idx{0, 1};
  MlpGrads grads = zero_grads(params);
  const LossStats stats = ppo_loss_and_grad(params, batch, idx, hp, kl_coeff, grads);
  CHECK(stats.clip_fraction == 1.0);
  CHECK(stats.policy_loss == doctest::Approx(-(1.0 + hp.clip)).epsilon(1e-9));
  for (const Linear& l : grads.actor.layers) {
    CHECK(l.w.isZero(0.0));
    CHECK(l.b.isZero(0.0));
  }
}

TEST_CASE("full loss gradient matches central finite differences") {
  Rng rng(52);
  const MlpConfig dims{5, 7, 4};
  Hyperparams hp;
  hp.clip = 0.2;
  hp.vf_clip = 0.7;  // small cap so the clamped value branch activates
  hp.entropy_coeff = 0.01;
  hp.vf_loss_coeff = 0.8;
  const double kl_coeff = 0.15;
  const double h = 1e-5;

  int cases = 0;
  int clip_active_cases = 0;
  int vf_capped_rows = 0;
  while (cases < 100) {
    MlpParams params = init_params(rng, dims);
    params.actor.layers.back().w *= 100.0;  // undo init damping
    const int n = 6;
    RolloutBatch batch = synthetic_batch(params, n, rng, 2.0);
    // Off-policy behaviour: perturb the stored behaviour distribution so the
    // ratios spread across and beyond the clip range.
    for (int i = 0; i < n; ++i) {
      for (int a = 0; a < dims.n_actions; ++a) {
        batch.behaviour_logits(i, a) += (rng.uniform01() - 0.5) * 0.8;
      }
      ActionDistribution d{batch.behaviour_logits.row(i).transpose()};
      batch.behaviour_logp(i) = d.log_prob(batch.actions(i));
    }
    compute_gae_into(batch, 0.99, 0.95);
    standardize_advantages(batch);

    // Skip minibatches with a ratio or value error too close to a kink: the
    // finite-difference step would straddle the non-differentiable point.
    bool near_kink = false;
    bool any_clipped = false;
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd obs = batch.obs.row(i).transpose();
      const auto [dist, value] = forward(params, obs);
      const double rho = std::exp(dist.log_prob(batch.actions(i)) - batch.behaviour_logp(i));
      if (std::abs(rho - (1.0 - hp.clip)) < 5e-3 || std::abs(rho - (1.0 + hp.clip)) < 5e-3) {
        near_kink = true;
      }
      if (rho < 1.0 - hp.clip || rho > 1.0 + hp.clip) any_clipped = true;
      const double err = value - batch.returns(i);
      if (std::abs(err * err - hp.vf_clip * hp.vf_clip) < 5e-3) near_kink = true;
      if (err * err > hp.vf_clip * hp.vf_clip) ++vf_capped_rows;
    }
    if (near_kink) continue;
    ++cases;
    if (any_clipped) ++clip_active_cases;

    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    MlpGrads grads = zero_grads(params);
    ppo_loss_and_grad(params, batch, idx, hp, kl_coeff, grads);

    MlpParams grad_holder = params;
    for (std::size_t l = 0; l < grad_holder.actor.layers.size(); ++l) {
      grad_holder.actor.layers[l] = grads.actor.layers[l];
      grad_holder.critic.layers[l] = grads.critic.layers[l];
    }
    const Eigen::VectorXd analytic = flatten(grad_holder);

    Eigen::VectorXd flat = flatten(params);
    MlpGrads scratch = zero_grads(params);
    for (int k = 0; k < flat.size(); ++k) {
      const double saved = flat(k);
      flat(k) = saved + h;
      unflatten(flat, params);
      const double up = ppo_loss_and_grad(params, batch, idx, hp, kl_coeff, scratch).loss;
      flat(k) = saved - h;
      unflatten(flat, params);
      const double down = ppo_loss_and_grad(params, batch, idx, hp, kl_coeff, scratch).loss;
      flat(k) = saved;
      unflatten(flat, params);
      const double fd = (up - down) / (2.0 * h);
      const double scale = std::max({std::abs(fd), std::abs(analytic(k)), 1e-6});
      if (std::abs(fd - analytic(k)) / scale >= 1e-4) {
        CAPTURE(cases);
        CAPTURE(k);
        CAPTURE(fd);
        CAPTURE(analytic(k));
        REQUIRE(std::abs(fd - analytic(k)) / scale < 1e-4);
      }
    }
  }
  CHECK(cases >= 100);
  CHECK(clip_active_cases > 10);
  CHECK(vf_capped_rows > 0);
}

TEST_CASE("adam: zero gradients leave parameters unchanged") {
  Rng rng(60);
  MlpParams params = init_params(rng, {4, 5, 3});
  const MlpParams before = params;
  AdamState adam = make_adam_state(params);
  Hyperparams hp;
  adam_step(params, zero_grads(params), adam, hp);
  CHECK(params_equal(params, before));
}

TEST_CASE("adam: first step approximates -lr * sign(gradient)") {
  Rng rng(61);
  MlpParams params = init_params(rng, {4, 5, 3});
  const Eigen::VectorXd before = flatten(params);
  MlpGrads grads = zero_grads(params);
  for (Linear& l : grads.actor.layers) {
    l.w.setConstant(3.7);
    l.b.setConstant(-0.9);
  }
  for (Linear& l : grads.critic.layers) {
    l.w.setConstant(-123.0);
    l.b.setConstant(55.0);
  }
  AdamState adam = make_adam_state(params);
  Hyperparams hp;
  hp.learning_rate = 1e-3;
  adam_step(params, grads, adam, hp);
  const Eigen::VectorXd after = flatten(params);
  MlpParams holder = params;
  for (std::size_t l = 0; l < holder.actor.layers.size(); ++l) {
    holder.actor.layers[l] = grads.actor.layers[l];
    holder.critic.layers[l] = grads.critic.layers[l];
  }
  const Eigen::VectorXd g = flatten(holder);
  for (int k = 0; k < after.size(); ++k) {
    const double update = after(k) - before(k);
    CHECK(update == doctest::Approx(-hp.learning_rate * (g(k) > 0 ? 1.0 : -1.0)).epsilon(1e-6));
  }
}

TEST_CASE("adam matches the scalar recursion to 1e-12") {
  // Drive a 1-parameter network shape through adam_step and replay the
  // textbook recursion side by side.
  MlpParams params;
  params.dims = {1, 1, 1};
  params.actor.layers = {{Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Zero(1)},
                         {Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Zero(1)},
                         {Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Zero(1)}};
  params.critic = params.actor;
  params.actor.layers[0].w(0, 0) = 0.5;

  Hyperparams hp;
  hp.learning_rate = 1e-3;
  AdamState adam = make_adam_state(params);

  double theta = 0.5, m = 0.0, v = 0.0;
  Rng rng(62);
  for (int t = 1; t <= 25; ++t) {
    const double g = (rng.uniform01() - 0.5) * 4.0;
    MlpGrads grads = zero_grads(params);
    grads.actor.layers[0].w(0, 0) = g;
    adam_step(params, grads, adam, hp);

    m = hp.adam_beta1 * m + (1 - hp.adam_beta1) * g;
    v = hp.adam_beta2 * v + (1 - hp.adam_beta2) * g * g;
    const double mhat = m / (1 - std::pow(hp.adam_beta1, t));
    const double vhat = v / (1 - std::pow(hp.adam_beta2, t));
    theta -= hp.learning_rate * mhat / (std::sqrt(vhat) + hp.adam_epsilon);
    CHECK(std::abs(params.actor.layers[0].w(0, 0) - theta) < 1e-12);
  }
}

TEST_CASE("adapt_kl_coeff applies the 2x / half-target rule") {
  CHECK(adapt_kl_coeff(0.2, 0.5, 0.2) == doctest::Approx(0.3));
  CHECK(adapt_kl_coeff(0.2, 0.05, 0.2) == doctest::Approx(0.1));
  CHECK(adapt_kl_coeff(0.2, 0.2, 0.2) == doctest::Approx(0.2));
  CHECK_THROWS(adapt_kl_coeff(0.0, 0.2, 0.2));
}

TEST_CASE("a zero learning rate leaves parameters bit-identical over an update") {
  Rng rng(70);
  MlpParams params = init_params(rng, {6, 8, 4});
  const MlpParams before = params;
  RolloutBatch batch = synthetic_batch(params, 48, rng);
  compute_gae_into(batch, 0.99, 1.0);
  Hyperparams hp;
  hp.learning_rate = 0.0;
  hp.sgd_minibatch = 16;
  hp.sgd_iters = 3;
  double kl_coeff = hp.kl_coeff;
  AdamState adam = make_adam_state(params);
  Rng shuffle(71);
  ppo_update(params, adam, batch, hp, kl_coeff, shuffle);
  CHECK(params_equal(params, before));
}

TEST_CASE("ppo_update is a pure function of its inputs (no agent-identity leak)") {
  Rng rng(72);
  MlpParams a = init_params(rng, {6, 8, 4});
  MlpParams b = a;
  RolloutBatch batch_a = synthetic_batch(a, 48, rng);
  RolloutBatch batch_b = batch_a;
  compute_gae_into(batch_a, 0.99, 1.0);
  compute_gae_into(batch_b, 0.99, 1.0);
  Hyperparams hp;
  hp.sgd_minibatch = 16;
  hp.sgd_iters = 2;
  hp.learning_rate = 1e-3;
  double kl_a = hp.kl_coeff, kl_b = hp.kl_coeff;
  AdamState adam_a = make_adam_state(a), adam_b = make_adam_state(b);
  Rng sh_a(5), sh_b(5);
  const UpdateStats sa = ppo_update(a, adam_a, batch_a, hp, kl_a, sh_a);
  const UpdateStats sb = ppo_update(b, adam_b, batch_b, hp, kl_b, sh_b);
  CHECK(params_equal(a, b));
  CHECK(sa.mean_kl == sb.mean_kl);
  CHECK(kl_a == kl_b);
}

TEST_CASE("joint action codec round-trips") {
  for (int j = 0; j < kJointActions; ++j) {
    const auto [a0, a1] = decode_joint(j);
    CHECK(encode_joint(a0, a1) == j);
  }
  CHECK(encode_joint(Action::kDown, Action::kLeft) == 1 * 5 + 2);
  CHECK_THROWS(decode_joint(25));
  CHECK_THROWS(decode_joint(-1));
}

TEST_CASE("a uniform joint policy marginalises to uniform per-agent actions") {
  ActionDistribution uniform{Eigen::VectorXd::Zero(kJointActions)};
  Rng rng(80);
  std::array<int, kNumActions> freq0{}, freq1{};
  const int n = 100'000;
  for (int i = 0; i < n; ++i) {
    const auto [a0, a1] = decode_joint(sample_action(uniform, rng).first);
    freq0[static_cast<int>(a0)]++;
    freq1[static_cast<int>(a1)]++;
  }
  for (int a = 0; a < kNumActions; ++a) {
    CHECK(std::abs(freq0[a] / static_cast<double>(n) - 0.2) < 0.01);
    CHECK(std::abs(freq1[a] / static_cast<double>(n) - 0.2) < 0.01);
  }
}

TEST_CASE("rollout collection: exact sizes, closed fragments, determinism") {
  EnvConfig config = variant("FFF");
  config.time_limit = 60;
  Rng init(90);
  const MlpParams p0 = init_params(init, {kObsDim, 8, kNumActions});
  const MlpParams p1 = init_params(init, {kObsDim, 8, kNumActions});

  auto collect = [&](std::uint64_t seed) {
    Rng root(seed);
    RolloutWorker worker(config, root.fork(Stream::kSpawn), root.fork(Stream::kStagMove),
                         root.fork(Stream::kSampling));
    IterationStats stats;
    auto batches = worker.collect_ippo(p0, p1, 300, stats);
    return std::make_pair(std::move(batches), stats);
  };

  auto [batches, stats] = collect(7);
  for (const RolloutBatch& b : batches) {
    CHECK(b.size() == 300);
    CHECK(b.ends.back() != FragmentEnd::kNone);
    CHECK(b.obs.rows() == 300);
    CHECK(b.behaviour_logp.allFinite());
  }
  CHECK(stats.episodes > 0);
  CHECK(stats.mean_combined <= 50.0);

  auto [batches2, stats2] = collect(7);
  CHECK((batches[0].rewards - batches2[0].rewards).cwiseAbs().maxCoeff() == 0.0);
  CHECK((batches[0].actions - batches2[0].actions).cwiseAbs().maxCoeff() == 0);
  CHECK((batches[1].rewards - batches2[1].rewards).cwiseAbs().maxCoeff() == 0.0);
  CHECK(stats.mean_combined == stats2.mean_combined);

  auto [batches3, stats3] = collect(8);
  CHECK((batches[0].rewards - batches3[0].rewards).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("episodes ending only by the time limit log zero completed episodes") {
  EnvConfig config = variant("FFF");
  // Three steps is below the stag's four-move reach to either corner, so
  // all-stay agents can never be frozen: every episode truncates.
  config.time_limit = 3;
  MlpParams stay;
  stay.dims = {kObsDim, 4, kNumActions};
  Rng init(91);
  stay = init_params(init, stay.dims);
  Eigen::VectorXd flat = Eigen::VectorXd::Zero(param_count(stay));
  unflatten(flat, stay);
  stay.actor.layers.back().b(static_cast<int>(Action::kStay)) = 1000.0;

  Rng root(92);
  RolloutWorker worker(config, root.fork(Stream::kSpawn), root.fork(Stream::kStagMove),
                       root.fork(Stream::kSampling));
  IterationStats stats;
  auto batches = worker.collect_ippo(stay, stay, 150, stats);
  CHECK(stats.episodes == 0);
  CHECK(stats.truncated == 50);
  CHECK(stats.mean_combined == 0.0);
  CHECK(batches[0].size() == 150);
  for (FragmentEnd e : batches[0].ends) CHECK(e != FragmentEnd::kTerminal);
}

TEST_CASE("iteration-0 training statistics match a Monte-Carlo uniform baseline") {
  EnvConfig config = variant("FFF");
  config.time_limit = 500;
  Hyperparams hp;
  hp.train_batch = 2000;
  hp.sgd_minibatch = 128;
  hp.sgd_iters = 2;
  TrainOptions opts;
  opts.net.hidden = 8;
  opts.iterations = 1;
  opts.seed = 2024;
  const IppoResult result = train_ippo(config, hp, opts);
  REQUIRE(result.curve.size() == 1);
  REQUIRE(result.curve[0].episodes > 20);

  const ScriptedAgent uniform(ScriptedKind::kUniformRandom);
  Rng rng(11);
  const MonteCarloValue mc = monte_carlo_value(config, uniform, uniform, 4000, 1.0, rng);
  const double mc_combined = mc.mean[0] + mc.mean[1];
  const double tol =
      3.0 * (mc.stderr_of_mean[0] + mc.stderr_of_mean[1]) +
      3.0 * result.curve[0].std_combined_reward / std::sqrt(result.curve[0].episodes) + 0.5;
  CHECK(std::abs(result.curve[0].mean_combined_reward - mc_combined) < tol);
}

TEST_CASE("train_ippo with zero iterations returns the fresh initialisation") {
  EnvConfig config = variant("FFF");
  Hyperparams hp;
  TrainOptions opts;
  opts.net.hidden = 8;
  opts.iterations = 0;
  opts.seed = 5;
  const IppoResult a = train_ippo(config, hp, opts);
  const IppoResult b = train_ippo(config, hp, opts);
  CHECK(a.curve.empty());
  CHECK(params_equal(a.policies[0], b.policies[0]));
  CHECK(params_equal(a.policies[1], b.policies[1]));
  CHECK_FALSE(params_equal(a.policies[0], a.policies[1]));
}

TEST_CASE("short ippo and centralized runs produce sane curves deterministically") {
  EnvConfig config = variant("FFF");
  config.time_limit = 80;
  Hyperparams hp;
  hp.train_batch = 400;
  hp.sgd_minibatch = 64;
  hp.sgd_iters = 2;
  TrainOptions opts;
  opts.net.hidden = 8;
  opts.iterations = 3;
  opts.seed = 99;

  const IppoResult a = train_ippo(config, hp, opts);
  const IppoResult b = train_ippo(config, hp, opts);
  REQUIRE(a.curve.size() == 3);
  CHECK(params_equal(a.policies[0], b.policies[0]));
  CHECK(params_equal(a.policies[1], b.policies[1]));
  for (std::size_t i = 0; i < a.curve.size(); ++i) {
    CHECK(a.curve[i].mean_combined_reward == b.curve[i].mean_combined_reward);
    CHECK(a.curve[i].mean_combined_reward <= 50.0);
  }

  const CentralResult c = train_centralized(config, hp, opts);
  REQUIRE(c.curve.size() == 3);
  CHECK(c.policy.dims.obs_dim == kJointObsDim);
  CHECK(c.policy.dims.n_actions == kJointActions);
}
