#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include "quadloco/policy.hpp"

namespace quadloco {

struct NonFiniteLoss : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One environment step as stored during rollout collection. The hidden state
/// is the recurrent state *before* the step, so any chunk of the sequence can
/// be replayed through the network from its own first entry.
struct Transition {
  VecX obs;     // normalized observation, as the policy saw it
  VecX hidden;  // recurrent state entering this step
  VecX action;  // unsquashed Gaussian sample
  double logp = 0.0;
  double value = 0.0;
  double reward = 0.0;
  bool done = false;
};

struct RolloutBatch {
  std::vector<std::vector<Transition>> envs;  // [env][step]
  std::vector<double> bootstrap_values;       // critic value after each env's last step
  std::vector<VecX> advantages;               // filled by compute_advantages
  std::vector<VecX> returns;
};

/// GAE over one sequence. dones truncate bootstrapping: a terminal step sees
/// no value beyond itself, while the segment end borrows bootstrap_value.
inline std::pair<VecX, VecX> compute_gae(const VecX& rewards, const VecX& values,
                                         const std::vector<std::uint8_t>& dones,
                                         double bootstrap_value, double gamma,
                                         double lambda) {
  const int n = static_cast<int>(rewards.size());
  VecX adv(n), ret(n);
  double gae = 0.0;
  for (int t = n - 1; t >= 0; --t) {
    const double not_done = dones[t] ? 0.0 : 1.0;
    const double next_value = (t + 1 < n) ? values[t + 1] : bootstrap_value;
    const double delta = rewards[t] + gamma * not_done * next_value - values[t];
    gae = delta + gamma * lambda * not_done * gae;
    adv[t] = gae;
    ret[t] = adv[t] + values[t];
  }
  return {adv, ret};
}

inline void compute_advantages(RolloutBatch& batch, double gamma, double lambda) {
  batch.advantages.clear();
  batch.returns.clear();
  for (std::size_t e = 0; e < batch.envs.size(); ++e) {
    const auto& seq = batch.envs[e];
    const int n = static_cast<int>(seq.size());
    VecX rewards(n), values(n);
    std::vector<std::uint8_t> dones(n);
    for (int t = 0; t < n; ++t) {
      rewards[t] = seq[t].reward;
      values[t] = seq[t].value;
      dones[t] = seq[t].done ? 1 : 0;
    }
    auto [adv, ret] = compute_gae(rewards, values, dones, batch.bootstrap_values[e],
                                  gamma, lambda);
    batch.advantages.push_back(std::move(adv));
    batch.returns.push_back(std::move(ret));
  }
}

/// Shift/scale all advantages to zero mean, unit variance across the batch.
inline void normalize_advantages(RolloutBatch& batch) {
  double sum = 0.0;
  int n = 0;
  for (const VecX& a : batch.advantages) {
    for (int i = 0; i < a.size(); ++i) sum += a[i];
    n += static_cast<int>(a.size());
  }
  if (n == 0) return;
  const double mean = sum / n;
  double sq = 0.0;
  for (const VecX& a : batch.advantages)
    for (int i = 0; i < a.size(); ++i) sq += (a[i] - mean) * (a[i] - mean);
  const double std = std::sqrt(sq / n) + 1e-8;
  for (VecX& a : batch.advantages)
    for (int i = 0; i < a.size(); ++i) a[i] = (a[i] - mean) / std;
}

/// A stretch of one env's sequence short enough for truncated BPTT and never
/// spanning an episode boundary.
struct Chunk {
  int env = 0;
  int start = 0;
  int len = 0;
};

inline std::vector<Chunk> make_chunks(const RolloutBatch& batch, int bptt_length) {
  std::vector<Chunk> chunks;
  for (std::size_t e = 0; e < batch.envs.size(); ++e) {
    const auto& seq = batch.envs[e];
    int start = 0;
    for (int t = 0; t < static_cast<int>(seq.size()); ++t) {
      const bool boundary = seq[t].done || t - start + 1 == bptt_length ||
                            t + 1 == static_cast<int>(seq.size());
      if (boundary) {
        chunks.push_back({static_cast<int>(e), start, t - start + 1});
        start = t + 1;
      }
    }
  }
  return chunks;
}

/// Diagonal-Gaussian log density of an unsquashed action.
inline double gaussian_logp(const VecX& action, const VecX& mean, const VecX& log_std) {
  double lp = -0.5 * static_cast<double>(action.size()) * std::log(2.0 * kPi);
  for (int i = 0; i < action.size(); ++i) {
    const double z = (action[i] - mean[i]) * std::exp(-log_std[i]);
    lp += -0.5 * z * z - log_std[i];
  }
  return lp;
}

inline double gaussian_entropy(const VecX& log_std) {
  double h = 0.5 * static_cast<double>(log_std.size()) * std::log(2.0 * kPi * std::exp(1.0));
  for (int i = 0; i < log_std.size(); ++i) h += log_std[i];
  return h;
}

/// First-moment/second-moment optimizer over the flat parameter vector.
class Adam {
 public:
  Adam() = default;
  Adam(int n, double lr) : lr_(lr), m_(VecX::Zero(n)), v_(VecX::Zero(n)) {}

  void step(VecX& params, const VecX& grad) {
    ++t_;
    m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
    v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    for (int i = 0; i < params.size(); ++i)
      params[i] -= lr_ * (m_[i] / bc1) / (std::sqrt(v_[i] / bc2) + eps_);
  }

  double learning_rate() const { return lr_; }

 private:
  double lr_ = 3e-4;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  long t_ = 0;
  VecX m_, v_;
};

struct PpoStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double kl = 0.0;            // last minibatch's estimate, mean(logp_old - logp_new)
  double clip_fraction = 0.0;
  double grad_norm = 0.0;     // pre-clip norm of the last applied gradient
  int minibatches_run = 0;
  bool early_stopped = false;
};

struct MinibatchResult {
  double policy_loss = 0.0;  // summed over steps, not yet divided by n_steps
  double value_loss = 0.0;
  double entropy = 0.0;
  double kl_sum = 0.0;
  int clipped = 0;
  int n_steps = 0;
};

/// Loss gradient for the chunks in [lo, hi), accumulated into grad and
/// already scaled by 1/n_steps. Shared by ppo_update and the gradient tests.
inline MinibatchResult ppo_minibatch_gradient(const PolicyNet& net,
                                              const RolloutBatch& batch,
                                              const std::vector<Chunk>& chunks,
                                              std::size_t lo, std::size_t hi,
                                              const TrainConfig& cfg,
                                              PolicyNet::Tensors& grad) {
  MinibatchResult res;
  for (std::size_t c = lo; c < hi; ++c) res.n_steps += chunks[c].len;
  const double inv_n = 1.0 / res.n_steps;

  for (std::size_t c = lo; c < hi; ++c) {
    const Chunk& ch = chunks[c];
    const auto& seq = batch.envs[ch.env];
    std::vector<PolicyNet::Cache> caches(ch.len);
    std::vector<PolicyNet::OutputGrad> grads(ch.len);
    VecX hidden = seq[ch.start].hidden;
    for (int k = 0; k < ch.len; ++k) {
      const Transition& tr = seq[ch.start + k];
      const PolicyNet::Output out = net.forward_cached(tr.obs, hidden, caches[k]);
      hidden = out.hidden;

      const double logp = gaussian_logp(tr.action, out.mean, out.log_std);
      const double adv = batch.advantages[ch.env][ch.start + k];
      const double ret = batch.returns[ch.env][ch.start + k];
      const double ratio = std::exp(logp - tr.logp);
      const double clipped_ratio = clamp(ratio, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps);
      const double s_plain = ratio * adv;
      const double s_clip = clipped_ratio * adv;
      res.policy_loss -= std::min(s_plain, s_clip);
      if (std::abs(ratio - 1.0) > cfg.clip_eps) ++res.clipped;
      res.kl_sum += tr.logp - logp;

      const double verr = out.value - ret;
      res.value_loss += 0.5 * verr * verr;
      res.entropy += gaussian_entropy(out.log_std);

      // d loss / d logp flows only through the unclipped branch
      const double dlogp = (s_plain <= s_clip) ? -ratio * adv * inv_n : 0.0;
      PolicyNet::OutputGrad& og = grads[k];
      og.d_mean.resize(out.mean.size());
      og.d_log_std.resize(out.mean.size());
      for (int i = 0; i < out.mean.size(); ++i) {
        const double inv_var = std::exp(-2.0 * out.log_std[i]);
        const double diff = tr.action[i] - out.mean[i];
        og.d_mean[i] = dlogp * diff * inv_var;
        og.d_log_std[i] =
            dlogp * (diff * diff * inv_var - 1.0) - cfg.entropy_coef * inv_n;
      }
      og.d_value = cfg.value_coef * verr * inv_n;
    }
    net.backward(caches, grads, grad);
  }
  return res;
}

/// Clipped-surrogate update over the gathered batch: several epochs of
/// minibatched gradient steps, stopping early once the KL estimate passes the
/// configured ceiling. A non-finite loss or gradient rolls the parameters
/// back to their pre-update values and raises NonFiniteLoss.
inline PpoStats ppo_update(PolicyNet& net, Adam& opt, const RolloutBatch& batch,
                           const TrainConfig& cfg, Rng& rng) {
  const VecX snapshot = net.flatten();
  std::vector<Chunk> chunks = make_chunks(batch, cfg.bptt_length);
  PpoStats stats;

  double stat_weight = 0.0;
  double acc_policy = 0.0, acc_value = 0.0, acc_entropy = 0.0, acc_clip = 0.0;

  for (int epoch = 0; epoch < cfg.epochs && !stats.early_stopped; ++epoch) {
    // Fisher-Yates with the caller's stream keeps the pass order reproducible.
    for (int i = static_cast<int>(chunks.size()) - 1; i > 0; --i)
      std::swap(chunks[i], chunks[rng.uniform_int(0, i)]);

    const int mb_count =
        std::min(cfg.minibatches, std::max(static_cast<int>(chunks.size()), 1));
    for (int mb = 0; mb < mb_count && !stats.early_stopped; ++mb) {
      const std::size_t lo = chunks.size() * mb / mb_count;
      const std::size_t hi = chunks.size() * (mb + 1) / mb_count;
      if (lo == hi) continue;

      PolicyNet::Tensors grad = net.zero_like();
      const MinibatchResult mb_res =
          ppo_minibatch_gradient(net, batch, chunks, lo, hi, cfg, grad);
      const int n_steps = mb_res.n_steps;

      const double loss = (mb_res.policy_loss + cfg.value_coef * mb_res.value_loss -
                           cfg.entropy_coef * mb_res.entropy) / n_steps;
      VecX flat_grad = PolicyNet::flatten_tensors(grad);
      if (!std::isfinite(loss) || !flat_grad.allFinite()) {
        net.unflatten(snapshot);
        throw NonFiniteLoss("ppo update produced a non-finite loss or gradient");
      }

      stats.grad_norm = flat_grad.norm();
      if (stats.grad_norm > cfg.grad_clip && stats.grad_norm > 0.0)
        flat_grad *= cfg.grad_clip / stats.grad_norm;

      VecX params = net.flatten();
      opt.step(params, flat_grad);
      net.unflatten(params);
      if (!net.all_finite()) {
        net.unflatten(snapshot);
        throw NonFiniteLoss("ppo update produced non-finite parameters");
      }

      acc_policy += mb_res.policy_loss;
      acc_value += mb_res.value_loss;
      acc_entropy += mb_res.entropy;
      acc_clip += mb_res.clipped;
      stat_weight += n_steps;
      ++stats.minibatches_run;

      stats.kl = mb_res.kl_sum / n_steps;
      if (stats.kl > cfg.kl_limit) stats.early_stopped = true;
    }
  }

  if (stat_weight > 0.0) {
    stats.policy_loss = acc_policy / stat_weight;
    stats.value_loss = acc_value / stat_weight;
    stats.entropy = acc_entropy / stat_weight;
    stats.clip_fraction = acc_clip / stat_weight;
  }
  return stats;
}

}  // namespace quadloco
