#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>

#include "quadloco/policy.hpp"
#include "quadloco/rng.hpp"

using namespace quadloco;

namespace {

// Small enough for exhaustive finite differences, full action width.
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

std::string temp_path(const char* name) {
  return std::string(::testing::TempDir()) + name;
}

}  // namespace

TEST(PolicyForward, ZeroWeightsGiveZeroOutputsAndFixedPoint) {
  const PolicyConfig pc = tiny_policy();
  PolicyNet net(pc);  // constructed with all-zero weights
  const VecX obs = VecX::Constant(pc.proprio_dim + pc.extero_dim, 0.3);
  const PolicyNet::Output out = net.forward(obs, net.initial_hidden());
  EXPECT_EQ(out.mean.norm(), 0.0);
  EXPECT_EQ(out.value, 0.0);
  // gates at sigmoid(0) = 1/2, candidate at tanh(0) = 0: zero hidden maps to zero
  EXPECT_EQ(out.hidden.norm(), 0.0);
  for (int i = 0; i < pc.action_dim; ++i)
    EXPECT_DOUBLE_EQ(out.log_std[i], pc.init_log_std);
}

TEST(PolicyForward, DeterministicAcrossCalls) {
  const PolicyConfig pc = tiny_policy();
  PolicyNet net(pc);
  Rng rng(77);
  net.init(rng);
  const VecX obs = random_obs(pc, rng);
  VecX hidden(pc.hidden_dim);
  for (int i = 0; i < hidden.size(); ++i) hidden[i] = rng.uniform(-0.5, 0.5);

  const PolicyNet::Output a = net.forward(obs, hidden);
  const PolicyNet::Output b = net.forward(obs, hidden);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.hidden, b.hidden);
  EXPECT_EQ(a.log_std, b.log_std);
}

TEST(PolicyForward, RejectsMismatchedSizes) {
  PolicyNet net(tiny_policy());
  EXPECT_THROW(net.forward(VecX::Zero(4), net.initial_hidden()), LayoutMismatch);
  EXPECT_THROW(net.forward(VecX::Zero(5), VecX::Zero(2)), LayoutMismatch);
}

TEST(PolicyForward, LogStdIsClampedToConfiguredRange) {
  const PolicyConfig pc = tiny_policy();
  PolicyNet net(pc);
  net.tensors().log_std.setConstant(-9.0);
  net.tensors().log_std(0, 0) = 5.0;
  const VecX ls = net.clamped_log_std();
  EXPECT_DOUBLE_EQ(ls[0], pc.log_std_max);
  for (int i = 1; i < pc.action_dim; ++i) EXPECT_DOUBLE_EQ(ls[i], pc.log_std_min);
}

// Reverse-mode gradients audited coordinate by coordinate against central
// finite differences on a network small enough to brute-force.
TEST(PolicyGradient, MatchesCentralFiniteDifferences) {
  const PolicyConfig pc = tiny_policy();
  PolicyNet net(pc);
  Rng rng(2024);
  net.init(rng);
  ASSERT_LE(net.parameter_count(), 200);

  const int steps = 3;
  std::vector<VecX> obs_seq;
  std::vector<VecX> w_mean, w_log_std;
  std::vector<double> w_value;
  for (int t = 0; t < steps; ++t) {
    obs_seq.push_back(random_obs(pc, rng));
    VecX wm(pc.action_dim), ws(pc.action_dim);
    for (int i = 0; i < pc.action_dim; ++i) {
      wm[i] = rng.uniform(-1.0, 1.0);
      ws[i] = rng.uniform(-1.0, 1.0);
    }
    w_mean.push_back(wm);
    w_log_std.push_back(ws);
    w_value.push_back(rng.uniform(-1.0, 1.0));
  }

  // scalar probe loss: weighted sums of all network outputs over the sequence
  auto loss = [&](PolicyNet& n) {
    double l = 0.0;
    VecX h = n.initial_hidden();
    for (int t = 0; t < steps; ++t) {
      const PolicyNet::Output out = n.forward(obs_seq[t], h);
      l += w_mean[t].dot(out.mean) + w_log_std[t].dot(out.log_std) +
           w_value[t] * out.value;
      h = out.hidden;
    }
    return l;
  };

  PolicyNet::Tensors grad = net.zero_like();
  {
    std::vector<PolicyNet::Cache> caches(steps);
    std::vector<PolicyNet::OutputGrad> grads(steps);
    VecX h = net.initial_hidden();
    for (int t = 0; t < steps; ++t) {
      net.forward_cached(obs_seq[t], h, caches[t]);
      h = caches[t].h;
      grads[t].d_mean = w_mean[t];
      grads[t].d_log_std = w_log_std[t];
      grads[t].d_value = w_value[t];
    }
    net.backward(caches, grads, grad);
  }
  const VecX analytic = PolicyNet::flatten_tensors(grad);

  const double h_fd = 1e-5;
  VecX flat = net.flatten();
  double worst = 0.0;
  for (int i = 0; i < flat.size(); ++i) {
    const double saved = flat[i];
    flat[i] = saved + h_fd;
    net.unflatten(flat);
    const double lp = loss(net);
    flat[i] = saved - h_fd;
    net.unflatten(flat);
    const double lm = loss(net);
    flat[i] = saved;
    const double fd = (lp - lm) / (2.0 * h_fd);
    const double rel =
        std::abs(analytic[i] - fd) / std::max(1e-6, std::abs(analytic[i]) + std::abs(fd));
    worst = std::max(worst, rel);
  }
  net.unflatten(flat);
  EXPECT_LT(worst, 1e-4);
}

TEST(PolicyParams, FlattenUnflattenRoundTrip) {
  PolicyNet net(tiny_policy());
  Rng rng(5);
  net.init(rng);
  VecX flat = net.flatten();
  EXPECT_EQ(flat.size(), net.parameter_count());
  flat[7] += 0.25;
  flat[flat.size() - 1] -= 0.5;
  net.unflatten(flat);
  EXPECT_EQ(net.flatten(), flat);
  EXPECT_THROW(net.unflatten(VecX::Zero(flat.size() + 1)), LayoutMismatch);
}

TEST(PolicyCheckpoint, RoundTripPreservesParamsAndStats) {
  const PolicyConfig pc = tiny_policy();
  PolicyNet net(pc);
  Rng rng(99);
  net.init(rng);
  ObsNormalizer norm(pc.proprio_dim + pc.extero_dim);
  std::vector<VecX> batch;
  for (int i = 0; i < 32; ++i) batch.push_back(random_obs(pc, rng) * 3.0);
  norm.update(batch);

  const std::string path = temp_path("roundtrip.ckpt");
  save_checkpoint(path, net, norm, "deadbeef01020304");
  const Checkpoint ck = load_checkpoint(path);

  EXPECT_EQ(ck.config_hash, "deadbeef01020304");
  EXPECT_EQ(ck.tool_version, kVersion);
  EXPECT_EQ(ck.net.config().hidden_dim, pc.hidden_dim);
  // payload is float32, so loaded params match to single precision
  const VecX a = net.flatten(), b = ck.net.flatten();
  for (int i = 0; i < a.size(); ++i)
    EXPECT_NEAR(a[i], b[i], 1e-6 * std::max(1.0, std::abs(a[i])));
  for (int i = 0; i < norm.mean().size(); ++i) {
    EXPECT_NEAR(norm.mean()[i], ck.normalizer.mean()[i], 1e-5);
    EXPECT_NEAR(norm.variance()[i], ck.normalizer.variance()[i], 1e-5);
  }
}

TEST(PolicyCheckpoint, SecondRoundTripIsBitIdentical) {
  const PolicyConfig pc = tiny_policy();
  PolicyNet net(pc);
  Rng rng(42);
  net.init(rng);
  ObsNormalizer norm(pc.proprio_dim + pc.extero_dim);

  const std::string p1 = temp_path("once.ckpt");
  const std::string p2 = temp_path("twice.ckpt");
  save_checkpoint(p1, net, norm, "0000000000000000");
  const Checkpoint ck1 = load_checkpoint(p1);
  save_checkpoint(p2, ck1.net, ck1.normalizer, "0000000000000000");
  const Checkpoint ck2 = load_checkpoint(p2);

  // quantization is idempotent: a reloaded net re-saves to the same bytes
  std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
  const std::string b1((std::istreambuf_iterator<char>(f1)),
                       std::istreambuf_iterator<char>());
  const std::string b2((std::istreambuf_iterator<char>(f2)),
                       std::istreambuf_iterator<char>());
  EXPECT_EQ(b1, b2);
  EXPECT_EQ(ck1.net.flatten(), ck2.net.flatten());

  // and both loaded nets produce bit-identical trajectories
  VecX h1 = ck1.net.initial_hidden(), h2 = ck2.net.initial_hidden();
  Rng orng(7);
  for (int t = 0; t < 10; ++t) {
    const VecX obs = random_obs(pc, orng);
    const PolicyNet::Output o1 = ck1.net.forward(obs, h1);
    const PolicyNet::Output o2 = ck2.net.forward(obs, h2);
    ASSERT_EQ(o1.mean, o2.mean);
    ASSERT_EQ(o1.value, o2.value);
    h1 = o1.hidden;
    h2 = o2.hidden;
  }
}

TEST(PolicyCheckpoint, RejectsCorruptAndMismatchedFiles) {
  const PolicyConfig pc = tiny_policy();
  PolicyNet net(pc);
  ObsNormalizer norm(pc.proprio_dim + pc.extero_dim);
  const std::string path = temp_path("victim.ckpt");
  save_checkpoint(path, net, norm, "feedface00000000");

  std::ifstream in(path, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();

  {  // bad magic
    std::string bad = bytes;
    bad[0] = 'X';
    const std::string p = temp_path("badmagic.ckpt");
    std::ofstream(p, std::ios::binary).write(bad.data(), bad.size());
    EXPECT_THROW(load_checkpoint(p), CheckpointError);
  }
  {  // truncated payload
    const std::string p = temp_path("short.ckpt");
    std::ofstream(p, std::ios::binary).write(bytes.data(), bytes.size() - 4);
    EXPECT_THROW(load_checkpoint(p), CheckpointError);
  }
  {  // manifest says a different architecture than the stored tensors
    std::string patched = bytes;
    const std::string from = "\"hidden_dim\":3";
    const auto pos = patched.find(from);
    ASSERT_NE(pos, std::string::npos);
    patched.replace(pos, from.size(), "\"hidden_dim\":4");
    const std::string p = temp_path("mismatch.ckpt");
    std::ofstream(p, std::ios::binary).write(patched.data(), patched.size());
    EXPECT_THROW(load_checkpoint(p), CheckpointError);
  }
  {  // not a checkpoint at all
    const std::string p = temp_path("noise.ckpt");
    std::ofstream(p, std::ios::binary).write("hello", 5);
    EXPECT_THROW(load_checkpoint(p), CheckpointError);
  }
  EXPECT_THROW(load_checkpoint(temp_path("does_not_exist.ckpt")), CheckpointError);
}

TEST(Normalizer, TracksBatchStatisticsIncrementally) {
  const int dim = 4;
  Rng rng(3);
  std::vector<VecX> all, first, second;
  for (int i = 0; i < 50; ++i) {
    VecX v(dim);
    for (int d = 0; d < dim; ++d) v[d] = rng.normal() * (d + 1) + d;
    all.push_back(v);
    (i < 20 ? first : second).push_back(v);
  }

  ObsNormalizer one(dim), two(dim);
  one.update(all);
  two.update(first);
  two.update(second);
  for (int d = 0; d < dim; ++d) {
    EXPECT_NEAR(one.mean()[d], two.mean()[d], 1e-10);
    EXPECT_NEAR(one.variance()[d], two.variance()[d], 1e-10);
  }
  EXPECT_NEAR(one.count(), 50.0, 1e-3);

  // against direct statistics (initial pseudo-count washes in at 1e-4 weight)
  VecX mean = VecX::Zero(dim);
  for (const VecX& v : all) mean += v;
  mean /= 50.0;
  for (int d = 0; d < dim; ++d) EXPECT_NEAR(one.mean()[d], mean[d], 1e-4);
}

TEST(Normalizer, NormalizationCentersAndClips) {
  ObsNormalizer norm(2);
  std::vector<VecX> batch;
  for (int i = 0; i < 100; ++i) {
    VecX v(2);
    v << 5.0 + 0.1 * (i % 7), -3.0;
    batch.push_back(v);
  }
  norm.update(batch);
  const VecX z = norm.normalize(batch[3]);
  EXPECT_LT(std::abs(z[0]), 3.0);
  // constant channel: variance ~ 0, huge deviation must clip at +/-10
  VecX probe(2);
  probe << 5.0, 100.0;
  EXPECT_DOUBLE_EQ(norm.normalize(probe)[1], 10.0);
}
