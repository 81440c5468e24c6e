#include <gtest/gtest.h>

#include <cmath>

#include "quadloco/ppo.hpp"
#include "quadloco/rng.hpp"

using namespace quadloco;

namespace {

PolicyConfig tiny_policy() {
  PolicyConfig pc;
  pc.proprio_dim = 3;
  pc.extero_dim = 2;
  pc.proprio_latent = 2;
  pc.extero_latent = 2;
  pc.hidden_dim = 3;
  return pc;
}

VecX random_obs(const PolicyConfig& pc, Rng& rng) {
  VecX obs(pc.proprio_dim + pc.extero_dim);
  for (int i = 0; i < obs.size(); ++i) obs[i] = rng.uniform(-1.0, 1.0);
  return obs;
}

/// Rollout against the net itself, the way the trainer stores transitions:
/// per-step pre-step hidden, sampled action, log-prob and value at sampling
/// time, hidden reset to zero right after a done.
RolloutBatch make_batch(const PolicyNet& net, Rng& rng, int n_envs, int steps,
                        double done_p) {
  const PolicyConfig& pc = net.config();
  RolloutBatch b;
  b.envs.resize(n_envs);
  for (int e = 0; e < n_envs; ++e) {
    VecX h = net.initial_hidden();
    for (int t = 0; t < steps; ++t) {
      Transition tr;
      tr.obs = random_obs(pc, rng);
      tr.hidden = h;
      const PolicyNet::Output out = net.forward(tr.obs, h);
      tr.action = VecX(pc.action_dim);
      for (int i = 0; i < pc.action_dim; ++i)
        tr.action[i] = out.mean[i] + std::exp(out.log_std[i]) * rng.normal();
      tr.logp = gaussian_logp(tr.action, out.mean, out.log_std);
      tr.value = out.value;
      tr.reward = rng.uniform(-1.0, 1.0);
      tr.done = rng.uniform(0.0, 1.0) < done_p;
      h = tr.done ? net.initial_hidden() : out.hidden;
      b.envs[e].push_back(std::move(tr));
    }
    b.bootstrap_values.push_back(rng.uniform(-1.0, 1.0));
  }
  return b;
}

/// Independent implementation of the update objective, for finite
/// differences. Written from the loss definition, not from the code under
/// test.
double reference_loss(const PolicyNet& net, const RolloutBatch& batch,
                      const std::vector<Chunk>& chunks, const TrainConfig& cfg) {
  double policy = 0.0, value = 0.0, entropy = 0.0;
  int n = 0;
  for (const Chunk& ch : chunks) {
    VecX h = batch.envs[ch.env][ch.start].hidden;
    for (int k = 0; k < ch.len; ++k) {
      const Transition& tr = batch.envs[ch.env][ch.start + k];
      const PolicyNet::Output out = net.forward(tr.obs, h);
      h = out.hidden;

      double lp = 0.0;
      for (int i = 0; i < out.mean.size(); ++i) {
        const double sd = std::exp(out.log_std[i]);
        const double d = (tr.action[i] - out.mean[i]) / sd;
        lp += -0.5 * d * d - std::log(sd) - 0.5 * std::log(2.0 * kPi);
      }
      const double ratio = std::exp(lp - tr.logp);
      const double adv = batch.advantages[ch.env][ch.start + k];
      const double lo_r = 1.0 - cfg.clip_eps, hi_r = 1.0 + cfg.clip_eps;
      const double pinned = std::min(std::max(ratio, lo_r), hi_r);
      policy -= std::min(ratio * adv, pinned * adv);

      const double verr = out.value - batch.returns[ch.env][ch.start + k];
      value += 0.5 * verr * verr;
      for (int i = 0; i < out.log_std.size(); ++i)
        entropy += out.log_std[i] + 0.5 * std::log(2.0 * kPi * std::exp(1.0));
      ++n;
    }
  }
  return (policy + cfg.value_coef * value - cfg.entropy_coef * entropy) / n;
}

}  // namespace

TEST(Gae, LambdaZeroIsOneStepTd) {
  Rng rng(1);
  const int n = 8;
  VecX rewards(n), values(n);
  std::vector<std::uint8_t> dones(n, 0);
  for (int t = 0; t < n; ++t) {
    rewards[t] = rng.uniform(-1.0, 1.0);
    values[t] = rng.uniform(-1.0, 1.0);
  }
  dones[3] = 1;
  const double bootstrap = 0.7, gamma = 0.95;
  auto [adv, ret] = compute_gae(rewards, values, dones, bootstrap, gamma, 0.0);
  // lambda 0 kills every term beyond the first: A_t = r_t + g*V_{t+1} - V_t
  for (int t = 0; t < n; ++t) {
    const double next_v = (t == 3) ? 0.0 : (t + 1 < n ? values[t + 1] : bootstrap);
    EXPECT_NEAR(adv[t], rewards[t] + gamma * next_v - values[t], 1e-12);
    EXPECT_NEAR(ret[t], adv[t] + values[t], 1e-12);
  }
}

TEST(Gae, GammaZeroIsRewardMinusValue) {
  Rng rng(2);
  const int n = 6;
  VecX rewards(n), values(n);
  std::vector<std::uint8_t> dones(n, 0);
  for (int t = 0; t < n; ++t) {
    rewards[t] = rng.uniform(-2.0, 2.0);
    values[t] = rng.uniform(-2.0, 2.0);
  }
  auto [adv, ret] = compute_gae(rewards, values, dones, 1.3, 0.0, 0.9);
  for (int t = 0; t < n; ++t) EXPECT_NEAR(adv[t], rewards[t] - values[t], 1e-12);
}

// Exhaustive oracle: every episode length up to 5, every done pattern,
// advantages summed term by term from the definition.
TEST(Gae, MatchesBruteForceExpansionUpToFiveSteps) {
  Rng rng(3);
  for (int n = 1; n <= 5; ++n) {
    for (int mask = 0; mask < (1 << n); ++mask) {
      for (int rep = 0; rep < 3; ++rep) {
        VecX rewards(n), values(n);
        std::vector<std::uint8_t> dones(n);
        for (int t = 0; t < n; ++t) {
          rewards[t] = rng.uniform(-1.0, 1.0);
          values[t] = rng.uniform(-1.0, 1.0);
          dones[t] = (mask >> t) & 1;
        }
        const double bootstrap = rng.uniform(-1.0, 1.0);
        const double gamma = rng.uniform(0.1, 1.0);
        const double lambda = rng.uniform(0.1, 1.0);
        auto [adv, ret] = compute_gae(rewards, values, dones, bootstrap, gamma, lambda);

        for (int t = 0; t < n; ++t) {
          double expect = 0.0, w = 1.0;
          for (int k = t; k < n; ++k) {
            const double next_v =
                dones[k] ? 0.0 : (k + 1 < n ? values[k + 1] : bootstrap);
            expect += w * (rewards[k] + gamma * next_v - values[k]);
            if (dones[k]) break;
            w *= gamma * lambda;
          }
          ASSERT_NEAR(adv[t], expect, 1e-12)
              << "n=" << n << " mask=" << mask << " t=" << t;
          ASSERT_NEAR(ret[t], expect + values[t], 1e-12);
        }
      }
    }
  }
}

TEST(Chunks, TileSequencesWithoutCrossingDones) {
  PolicyNet net(tiny_policy());
  Rng rng(4);
  Rng init = rng.split(1);
  net.init(init);
  const int bptt = 7;
  RolloutBatch batch = make_batch(net, rng, 3, 50, 0.15);
  const std::vector<Chunk> chunks = make_chunks(batch, bptt);

  std::vector<int> next_start(batch.envs.size(), 0);
  for (const Chunk& ch : chunks) {
    ASSERT_GE(ch.len, 1);
    ASSERT_LE(ch.len, bptt);
    ASSERT_EQ(ch.start, next_start[ch.env]) << "chunks must tile contiguously";
    next_start[ch.env] = ch.start + ch.len;
    // a done may only sit on the last element of a chunk
    for (int k = 0; k + 1 < ch.len; ++k)
      ASSERT_FALSE(batch.envs[ch.env][ch.start + k].done);
  }
  for (std::size_t e = 0; e < batch.envs.size(); ++e)
    ASSERT_EQ(next_start[e], static_cast<int>(batch.envs[e].size()));
}

// The update gradient audited against central finite differences of an
// independently written loss, clip branches and all.
TEST(PpoGradient, MatchesFiniteDifferencesOfReferenceLoss) {
  PolicyNet net(tiny_policy());
  Rng rng(5);
  Rng init = rng.split(1);
  net.init(init);

  RolloutBatch batch = make_batch(net, rng, 2, 6, 0.2);
  // age the stored log-probs so ratios are spread away from 1
  for (auto& seq : batch.envs)
    for (Transition& tr : seq) tr.logp += rng.uniform(-0.15, 0.15);

  TrainConfig cfg;
  cfg.clip_eps = 0.2;
  cfg.value_coef = 0.4;
  cfg.entropy_coef = 0.01;
  cfg.bptt_length = 4;
  compute_advantages(batch, cfg.gamma, cfg.gae_lambda);
  normalize_advantages(batch);
  const std::vector<Chunk> chunks = make_chunks(batch, cfg.bptt_length);

  PolicyNet::Tensors grad = net.zero_like();
  ppo_minibatch_gradient(net, batch, chunks, 0, chunks.size(), cfg, grad);
  const VecX analytic = PolicyNet::flatten_tensors(grad);

  const double h = 1e-5;
  VecX flat = net.flatten();
  PolicyNet probe = net;
  double worst = 0.0;
  for (int i = 0; i < flat.size(); ++i) {
    const double saved = flat[i];
    flat[i] = saved + h;
    probe.unflatten(flat);
    const double lp = reference_loss(probe, batch, chunks, cfg);
    flat[i] = saved - h;
    probe.unflatten(flat);
    const double lm = reference_loss(probe, batch, chunks, cfg);
    flat[i] = saved;
    const double fd = (lp - lm) / (2.0 * h);
    const double rel =
        std::abs(analytic[i] - fd) / std::max(1e-6, std::abs(analytic[i]) + std::abs(fd));
    worst = std::max(worst, rel);
  }
  EXPECT_LT(worst, 1e-4);
}

// At ratio exactly 1 the clipped objective and the plain surrogate share the
// same gradient, so the clip width cannot change the very first update.
TEST(PpoUpdate, FirstStepIndependentOfClipWidthAtRatioOne) {
  PolicyNet net(tiny_policy());
  Rng rng(6);
  Rng init = rng.split(1);
  net.init(init);
  RolloutBatch batch = make_batch(net, rng, 2, 8, 0.1);

  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.minibatches = 1;
  cfg.kl_limit = 1e9;
  cfg.bptt_length = 4;
  compute_advantages(batch, cfg.gamma, cfg.gae_lambda);
  normalize_advantages(batch);

  auto run = [&](double eps) {
    PolicyNet n2 = net;
    Adam opt(n2.parameter_count(), cfg.learning_rate);
    Rng shuffle(123);
    TrainConfig c2 = cfg;
    c2.clip_eps = eps;
    ppo_update(n2, opt, batch, c2, shuffle);
    return n2.flatten();
  };

  const VecX wide = run(0.45);
  const VecX narrow = run(1e-12);
  ASSERT_EQ(wide.size(), narrow.size());
  for (int i = 0; i < wide.size(); ++i) ASSERT_EQ(wide[i], narrow[i]) << "param " << i;
}

// Degenerate clip: with eps = 0 the objective is flat wherever the ratio has
// moved to the favorable side, so a batch built that way must not move the
// policy at all.
TEST(PpoUpdate, ZeroClipWidthFreezesPinnedSamples) {
  PolicyNet net(tiny_policy());
  Rng rng(7);
  Rng init = rng.split(1);
  net.init(init);

  RolloutBatch batch = make_batch(net, rng, 2, 1, 0.0);
  batch.envs[0][0].done = true;
  batch.envs[1][0].done = true;
  // env0: positive advantage, ratio > 1; env1: negative advantage, ratio < 1
  batch.envs[0][0].reward = batch.envs[0][0].value + 2.0;
  batch.envs[0][0].logp -= 0.2;
  batch.envs[1][0].reward = batch.envs[1][0].value - 2.0;
  batch.envs[1][0].logp += 0.2;

  TrainConfig cfg;
  cfg.clip_eps = 0.0;
  cfg.value_coef = 0.0;
  cfg.entropy_coef = 0.0;
  cfg.epochs = 1;
  cfg.minibatches = 1;
  cfg.kl_limit = 1e9;
  compute_advantages(batch, cfg.gamma, cfg.gae_lambda);
  normalize_advantages(batch);
  ASSERT_GT(batch.advantages[0][0], 0.0);
  ASSERT_LT(batch.advantages[1][0], 0.0);

  const VecX before = net.flatten();
  Adam opt(net.parameter_count(), cfg.learning_rate);
  Rng shuffle(9);
  ppo_update(net, opt, batch, cfg, shuffle);
  const VecX after = net.flatten();
  for (int i = 0; i < before.size(); ++i) ASSERT_EQ(before[i], after[i]);
}

TEST(PpoUpdate, NonFiniteRewardRollsParametersBack) {
  PolicyNet net(tiny_policy());
  Rng rng(8);
  Rng init = rng.split(1);
  net.init(init);
  RolloutBatch batch = make_batch(net, rng, 1, 6, 0.0);
  batch.envs[0][2].reward = std::numeric_limits<double>::infinity();

  TrainConfig cfg;
  compute_advantages(batch, cfg.gamma, cfg.gae_lambda);
  normalize_advantages(batch);  // inf contaminates the whole batch

  const VecX before = net.flatten();
  Adam opt(net.parameter_count(), cfg.learning_rate);
  Rng shuffle(10);
  EXPECT_THROW(ppo_update(net, opt, batch, cfg, shuffle), NonFiniteLoss);
  const VecX after = net.flatten();
  for (int i = 0; i < before.size(); ++i) ASSERT_EQ(before[i], after[i]);
}

TEST(PpoUpdate, KlCeilingStopsTheUpdateEarly) {
  PolicyNet net(tiny_policy());
  Rng rng(11);
  Rng init = rng.split(1);
  net.init(init);
  RolloutBatch batch = make_batch(net, rng, 2, 16, 0.1);
  // stored log-probs far above the recomputed ones -> huge KL estimate
  for (auto& seq : batch.envs)
    for (Transition& tr : seq) tr.logp += 5.0;

  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.minibatches = 2;
  cfg.kl_limit = 0.03;
  compute_advantages(batch, cfg.gamma, cfg.gae_lambda);
  normalize_advantages(batch);

  Adam opt(net.parameter_count(), cfg.learning_rate);
  Rng shuffle(12);
  const PpoStats stats = ppo_update(net, opt, batch, cfg, shuffle);
  EXPECT_TRUE(stats.early_stopped);
  EXPECT_EQ(stats.minibatches_run, 1);
  EXPECT_GT(stats.kl, cfg.kl_limit);
}

TEST(PpoUpdate, GradNormClipBoundsTheAppliedStep) {
  PolicyNet net(tiny_policy());
  Rng rng(13);
  Rng init = rng.split(1);
  net.init(init);
  RolloutBatch batch = make_batch(net, rng, 2, 8, 0.0);
  for (auto& seq : batch.envs)
    for (Transition& tr : seq) tr.reward *= 50.0;  // big advantages, big gradient

  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.minibatches = 1;
  cfg.grad_clip = 0.5;
  cfg.kl_limit = 1e9;
  compute_advantages(batch, cfg.gamma, cfg.gae_lambda);
  normalize_advantages(batch);

  Adam opt(net.parameter_count(), cfg.learning_rate);
  Rng shuffle(14);
  const PpoStats stats = ppo_update(net, opt, batch, cfg, shuffle);
  EXPECT_GT(stats.grad_norm, cfg.grad_clip);  // raw gradient was bigger
  EXPECT_TRUE(net.all_finite());
}

TEST(Adam, ConvergesOnAQuadraticBowl) {
  const int n = 5;
  VecX target(n);
  target << 1.0, -2.0, 0.5, 3.0, -0.25;
  VecX x = VecX::Zero(n);
  Adam opt(n, 0.05);
  for (int i = 0; i < 2000; ++i) {
    const VecX grad = x - target;
    opt.step(x, grad);
  }
  EXPECT_LT((x - target).norm(), 1e-3);
}

TEST(AdvantageNormalization, ZeroMeanUnitVariance) {
  RolloutBatch batch;
  batch.envs.resize(2);
  batch.advantages = {VecX(3), VecX(2)};
  batch.advantages[0] << 4.0, -1.0, 2.5;
  batch.advantages[1] << 0.5, -3.0;
  batch.returns = batch.advantages;
  normalize_advantages(batch);

  double sum = 0.0, sq = 0.0;
  for (const VecX& a : batch.advantages)
    for (int i = 0; i < a.size(); ++i) sum += a[i];
  for (const VecX& a : batch.advantages)
    for (int i = 0; i < a.size(); ++i) sq += a[i] * a[i];
  EXPECT_NEAR(sum / 5.0, 0.0, 1e-12);
  EXPECT_NEAR(sq / 5.0, 1.0, 1e-6);
}
