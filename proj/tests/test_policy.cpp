#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>

#include "staghunt/policy.hpp"

using namespace staghunt;

namespace {

Eigen::VectorXd random_obs(Rng& rng, int dim) {
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v(i) = rng.uniform01();
  return v;
}

// Central finite differences over every parameter, compared against the
// analytic gradient produced by `backward`. Relative error measured against
// the larger magnitude.
void check_gradient(MlpParams& params, const std::function<double(const MlpParams&)>& f,
                    const Eigen::VectorXd& analytic, double tol = 1e-4) {
  const double h = 1e-5;
  Eigen::VectorXd flat = flatten(params);
  REQUIRE(analytic.size() == flat.size());
  for (int k = 0; k < flat.size(); ++k) {
    const double saved = flat(k);
    flat(k) = saved + h;
    unflatten(flat, params);
    const double up = f(params);
    flat(k) = saved - h;
    unflatten(flat, params);
    const double down = f(params);
    flat(k) = saved;
    unflatten(flat, params);
    const double fd = (up - down) / (2.0 * h);
    const double scale = std::max({std::abs(fd), std::abs(analytic(k)), 1e-6});
    if (std::abs(fd - analytic(k)) / scale >= tol) {
      CAPTURE(k);
      CAPTURE(fd);
      CAPTURE(analytic(k));
      REQUIRE(std::abs(fd - analytic(k)) / scale < tol);
    }
  }
}

Eigen::VectorXd grads_to_vector(const MlpParams& params, const NetGrads& actor,
                                const NetGrads& critic) {
  MlpParams holder = params;
  int k = 0;
  auto copy_net = [&](Net& dst, const NetGrads& src) {
    for (std::size_t l = 0; l < dst.layers.size(); ++l) {
      dst.layers[l].w = src.layers[l].w;
      dst.layers[l].b = src.layers[l].b;
    }
    (void)k;
  };
  copy_net(holder.actor, actor);
  copy_net(holder.critic, critic);
  return flatten(holder);
}

}  // namespace

TEST_CASE("init_params shapes, determinism and near-uniform start") {
  Rng rng(3);
  const MlpConfig dims{12, 64, 5};
  const MlpParams p = init_params(rng, dims);
  REQUIRE(p.actor.layers.size() == 3);
  CHECK(p.actor.layers[0].w.rows() == 64);
  CHECK(p.actor.layers[0].w.cols() == 12);
  CHECK(p.actor.layers[1].w.rows() == 64);
  CHECK(p.actor.layers[2].w.rows() == 5);
  CHECK(p.critic.layers[2].w.rows() == 1);
  for (const Linear& l : p.actor.layers) CHECK(l.b.isZero());

  Rng rng2(3);
  CHECK(params_equal(p, init_params(rng2, dims)));
  Rng rng3(4);
  CHECK_FALSE(params_equal(p, init_params(rng3, dims)));

  // The 0.01-scaled final layer keeps the initial policy near-uniform.
  Rng obs_rng(17);
  for (int i = 0; i < 50; ++i) {
    const auto [dist, value] = forward(p, random_obs(obs_rng, 12));
    CHECK(dist.entropy() >= 0.99 * std::log(5.0));
  }
}

TEST_CASE("forward: zero weights give zero outputs; outputs stay finite") {
  Rng rng(5);
  MlpParams p = init_params(rng, {12, 16, 5});
  Eigen::VectorXd flat = Eigen::VectorXd::Zero(param_count(p));
  unflatten(flat, p);
  const auto [dist, value] = forward(p, random_obs(rng, 12));
  CHECK(dist.logits.isZero());
  CHECK(value == 0.0);

  MlpParams q = init_params(rng, {12, 16, 5});
  for (int i = 0; i < 200; ++i) {
    const auto [d, v] = forward(q, random_obs(rng, 12));
    CHECK(d.logits.allFinite());
    CHECK(std::isfinite(v));
  }
  CHECK_THROWS(forward(q, random_obs(rng, 7)));
}

TEST_CASE("forward is locally smooth in the observation") {
  Rng rng(6);
  const MlpParams p = init_params(rng, {12, 32, 5});
  const Eigen::VectorXd obs = random_obs(rng, 12);
  const auto [d0, v0] = forward(p, obs);
  Eigen::VectorXd obs2 = obs;
  obs2(3) += 1e-7;
  const auto [d1, v1] = forward(p, obs2);
  CHECK((d1.logits - d0.logits).cwiseAbs().maxCoeff() < 1e-4);
  CHECK(std::abs(v1 - v0) < 1e-4);
}

TEST_CASE("log_prob and entropy on uniform and extreme logits") {
  ActionDistribution uniform{Eigen::VectorXd::Zero(5)};
  for (int a = 0; a < 5; ++a) {
    CHECK(uniform.log_prob(a) == doctest::Approx(-std::log(5.0)).epsilon(1e-12));
  }
  CHECK(uniform.entropy() == doctest::Approx(std::log(5.0)).epsilon(1e-12));

  Eigen::VectorXd spiked = Eigen::VectorXd::Zero(5);
  spiked(2) = 1000.0;
  ActionDistribution sharp{spiked};
  CHECK(std::isfinite(sharp.entropy()));
  CHECK(sharp.entropy() < 1e-6);
  CHECK(std::abs(sharp.log_prob(2)) < 1e-9);

  // exp(log_prob) sums to one.
  Rng rng(8);
  for (int i = 0; i < 100; ++i) {
    Eigen::VectorXd logits(5);
    for (int k = 0; k < 5; ++k) logits(k) = (rng.uniform01() - 0.5) * 2e6;
    ActionDistribution d{logits};
    const Eigen::VectorXd lp = d.log_probs();
    CHECK(lp.allFinite());
    CHECK(lp.array().exp().sum() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::isfinite(d.entropy()));
  }
}

TEST_CASE("sample_action: determinism, degenerate and uniform frequencies") {
  Eigen::VectorXd spiked = Eigen::VectorXd::Zero(5);
  spiked(3) = 1000.0;
  ActionDistribution sharp{spiked};
  Rng rng(9);
  for (int i = 0; i < 1000; ++i) CHECK(sample_action(sharp, rng).first == 3);

  ActionDistribution uniform{Eigen::VectorXd::Zero(5)};
  Rng freq_rng(10);
  std::array<int, 5> counts{};
  const int n = 100'000;
  for (int i = 0; i < n; ++i) counts[sample_action(uniform, freq_rng).first]++;
  for (int a = 0; a < 5; ++a) {
    CHECK(std::abs(counts[a] / static_cast<double>(n) - 0.2) < 0.01);
  }

  Rng s1(77), s2(77);
  for (int i = 0; i < 100; ++i) {
    CHECK(sample_action(uniform, s1).first == sample_action(uniform, s2).first);
  }

  // Returned log-probability matches the distribution's own.
  Rng s3(78);
  const auto [a, lp] = sample_action(uniform, s3);
  CHECK(lp == doctest::Approx(uniform.log_prob(a)).epsilon(1e-12));
}

TEST_CASE("analytic gradients of log_prob, entropy and value match finite differences") {
  Rng rng(20);
  const MlpConfig dims{5, 8, 4};
  int cases = 0;
  for (int trial = 0; trial < 25; ++trial) {
    MlpParams p = init_params(rng, dims);
    // Undo the 0.01 scaling so actor gradients are not vanishingly small.
    p.actor.layers.back().w *= 100.0;
    for (int rep = 0; rep < 2; ++rep) {
      const Eigen::VectorXd obs = random_obs(rng, dims.obs_dim);
      const int action = rng.uniform_int(dims.n_actions);
      ++cases;

      // log_prob(action)
      {
        NetCache cache;
        NetGrads ga = zero_grads_like(p.actor);
        NetGrads gc = zero_grads_like(p.critic);
        const Eigen::MatrixXd logits = net_forward(p.actor, obs.transpose(), cache);
        ActionDistribution d{logits.row(0).transpose()};
        const Eigen::VectorXd probs = d.probs();
        Eigen::MatrixXd d_logits = -probs.transpose();
        d_logits(0, action) += 1.0;
        net_backward(p.actor, cache, d_logits, ga);
        check_gradient(
            p,
            [&](const MlpParams& q) {
              return forward(q, obs).first.log_prob(action);
            },
            grads_to_vector(p, ga, gc));
      }
      // entropy
      {
        NetCache cache;
        NetGrads ga = zero_grads_like(p.actor);
        NetGrads gc = zero_grads_like(p.critic);
        const Eigen::MatrixXd logits = net_forward(p.actor, obs.transpose(), cache);
        ActionDistribution d{logits.row(0).transpose()};
        const Eigen::VectorXd lp = d.log_probs();
        const Eigen::VectorXd probs = lp.array().exp();
        const double entropy = d.entropy();
        Eigen::MatrixXd d_logits =
            (-probs.array() * (lp.array() + entropy)).matrix().transpose();
        net_backward(p.actor, cache, d_logits, ga);
        check_gradient(p,
                       [&](const MlpParams& q) { return forward(q, obs).first.entropy(); },
                       grads_to_vector(p, ga, gc));
      }
      // value
      {
        NetCache cache;
        NetGrads ga = zero_grads_like(p.actor);
        NetGrads gc = zero_grads_like(p.critic);
        net_forward(p.critic, obs.transpose(), cache);
        Eigen::MatrixXd one(1, 1);
        one(0, 0) = 1.0;
        net_backward(p.critic, cache, one, gc);
        check_gradient(p, [&](const MlpParams& q) { return forward(q, obs).second; },
                       grads_to_vector(p, ga, gc));
      }
    }
  }
  CHECK(cases >= 50);
}

TEST_CASE("checkpoints round-trip bit-exactly") {
  Rng rng(30);
  const MlpParams p = init_params(rng, {12, 24, 5});
  const auto path = std::filesystem::temp_directory_path() / "staghunt_ckpt_test.ckpt";
  save_checkpoint(path, p, "seed:30");
  std::string provenance;
  const MlpParams q = load_checkpoint(path, &provenance);
  CHECK(params_equal(p, q));
  CHECK(provenance == "seed:30");
  CHECK(params_hash(p) == params_hash(q));

  // A truncated blob is rejected.
  const auto broken = std::filesystem::temp_directory_path() / "staghunt_ckpt_broken.ckpt";
  {
    std::ifstream in(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::ofstream out(broken, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 16));
  }
  CHECK_THROWS(load_checkpoint(broken));
  std::filesystem::remove(path);
  std::filesystem::remove(broken);
}

TEST_CASE("flatten/unflatten is an exact inverse") {
  Rng rng(31);
  MlpParams p = init_params(rng, {6, 7, 3});
  const Eigen::VectorXd flat = flatten(p);
  MlpParams q = init_params(rng, {6, 7, 3});
  unflatten(flat, q);
  CHECK(params_equal(p, q));
  CHECK(all_finite(p));
}
