#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "quadloco/environment.hpp"
#include "quadloco/io.hpp"
#include "quadloco/ppo.hpp"

namespace quadloco {

struct IterationMetrics {
  int iteration = 0;
  long total_steps = 0;
  double mean_return = 0.0;
  double mean_episode_length = 0.0;
  int episodes_completed = 0;
  double r_v = 0.0, r_vo = 0.0, r_tau = 0.0;
  double r_terrain = 0.0, r_height = 0.0, r_smooth = 0.0;
  double delta_h_mean = 0.0, delta_h_std = 0.0;
  double policy_loss = 0.0, value_loss = 0.0, entropy = 0.0;
  double kl = 0.0, clip_fraction = 0.0;
};

inline std::vector<std::string> metrics_columns() {
  return {"iteration",     "total_steps", "mean_return", "mean_episode_length",
          "episodes_completed", "r_v",    "r_vo",        "r_tau",
          "r_terrain",     "r_height",    "r_smooth",    "delta_h_mean",
          "delta_h_std",   "policy_loss", "value_loss",  "entropy",
          "kl",            "clip_fraction"};
}

inline std::vector<std::string> metrics_row(const IterationMetrics& m) {
  return {csv_num(m.iteration),
          csv_num(static_cast<int>(m.total_steps)),
          csv_num(m.mean_return),
          csv_num(m.mean_episode_length),
          csv_num(m.episodes_completed),
          csv_num(m.r_v),
          csv_num(m.r_vo),
          csv_num(m.r_tau),
          csv_num(m.r_terrain),
          csv_num(m.r_height),
          csv_num(m.r_smooth),
          csv_num(m.delta_h_mean),
          csv_num(m.delta_h_std),
          csv_num(m.policy_loss),
          csv_num(m.value_loss),
          csv_num(m.entropy),
          csv_num(m.kl),
          csv_num(m.clip_fraction)};
}

/// Runs an episode with the deterministic policy (action = mean) and frozen
/// normalizer stats. Returns the capped forward distance from the env.
struct EvalResult {
  double distance = 0.0;
  int steps = 0;
  Termination termination = Termination::None;
  double mean_r_v = 0.0;
};

inline EvalResult evaluate_policy(Environment& env, const PolicyNet& net,
                                  const ObsNormalizer& norm, std::uint64_t seed) {
  VecX obs = env.reset(seed);
  VecX hidden = net.initial_hidden();
  EvalResult out;
  double rv_sum = 0.0;
  while (true) {
    const PolicyNet::Output pf = net.forward(norm.normalize(obs), hidden);
    hidden = pf.hidden;
    const Environment::StepResult res = env.step(Vec14(pf.mean));
    rv_sum += res.reward.r_v;
    ++out.steps;
    if (res.done) {
      out.distance = res.info.distance;
      out.termination = res.info.termination;
      break;
    }
    obs = res.obs;
  }
  out.mean_r_v = out.steps > 0 ? rv_sum / out.steps : 0.0;
  return out;
}

/// Policy-gradient training loop: sequential rollout across a fixed set of
/// environments, advantage estimation, clipped-surrogate updates, and
/// per-iteration metrics. Fully deterministic for a given RunConfig seed.
class Trainer {
 public:
  using EnvFactory = std::function<Environment(int)>;
  using IterationCallback = std::function<void(const IterationMetrics&)>;

  Trainer(const RunConfig& cfg, EnvFactory factory)
      : cfg_(cfg),
        net_(cfg.policy),
        normalizer_(cfg.policy.proprio_dim + cfg.policy.extero_dim),
        opt_(0, cfg.train.learning_rate) {
    cfg_.validate();
    Rng root(cfg_.seed);
    Rng init_rng = root.split(1);
    net_.init(init_rng);
    opt_ = Adam(net_.parameter_count(), cfg_.train.learning_rate);
    shuffle_rng_ = root.split(2);

    const int n = cfg_.train.num_envs;
    envs_.reserve(n);
    for (int e = 0; e < n; ++e) {
      envs_.push_back(factory(e));
      action_rngs_.push_back(root.split(0x100 + static_cast<std::uint64_t>(e)));
      reset_counts_.push_back(0);
      obs_.push_back(envs_[e].reset(next_reset_seed(e)));
      hidden_.push_back(net_.initial_hidden());
      episode_return_.push_back(0.0);
      episode_length_.push_back(0);
    }
  }

  /// Runs the configured number of iterations. When out_dir is non-empty,
  /// writes metrics.csv as it goes and checkpoints on the configured cadence.
  void run(const std::string& out_dir, const IterationCallback& on_iteration = {}) {
    const std::string hash = config_hash_hex(cfg_);
    std::unique_ptr<CsvWriter> metrics;
    if (!out_dir.empty()) {
      std::filesystem::create_directories(out_dir);
      metrics = std::make_unique<CsvWriter>(out_dir + "/metrics.csv", hash,
                                            metrics_columns());
    }

    for (int iter = 0; iter < cfg_.train.iterations; ++iter) {
      const IterationMetrics m = step_iteration(iter);
      history_.push_back(m);
      if (metrics) {
        metrics->row(metrics_row(m));
        metrics->flush();
      }
      if (on_iteration) on_iteration(m);
      if (!out_dir.empty() && cfg_.train.checkpoint_every > 0 &&
          (iter + 1) % cfg_.train.checkpoint_every == 0) {
        char name[64];
        std::snprintf(name, sizeof(name), "/checkpoint_%06d.ckpt", iter + 1);
        save_checkpoint(out_dir + name, net_, normalizer_, hash);
      }
    }
    if (!out_dir.empty())
      save_checkpoint(out_dir + "/checkpoint_final.ckpt", net_, normalizer_, hash);
  }

  /// One collect/update cycle; exposed so tests can drive short runs.
  IterationMetrics step_iteration(int iter) {
    RolloutBatch batch;
    batch.envs.resize(envs_.size());
    std::vector<VecX> raw_batch;
    raw_batch.reserve(envs_.size() * cfg_.train.segment_length);

    IterationMetrics m;
    m.iteration = iter;
    double ep_return_sum = 0.0;
    long ep_length_sum = 0;
    double dh_sum = 0.0, dh_sq = 0.0;

    for (std::size_t e = 0; e < envs_.size(); ++e) {
      auto& seq = batch.envs[e];
      seq.reserve(cfg_.train.segment_length);
      for (int t = 0; t < cfg_.train.segment_length; ++t) {
        const VecX norm_obs = normalizer_.normalize(obs_[e]);
        const PolicyNet::Output pf = net_.forward(norm_obs, hidden_[e]);

        Vec14 action;
        for (int i = 0; i < kActionDim; ++i)
          action[i] = pf.mean[i] + std::exp(pf.log_std[i]) * action_rngs_[e].normal();

        Transition tr;
        tr.obs = norm_obs;
        tr.hidden = hidden_[e];
        tr.action = action;
        tr.logp = gaussian_logp(tr.action, pf.mean, pf.log_std);
        tr.value = pf.value;

        raw_batch.push_back(obs_[e]);
        const Environment::StepResult res = envs_[e].step(action);
        tr.reward = res.reward.total;
        tr.done = res.done;

        m.r_v += res.reward.r_v;
        m.r_vo += res.reward.r_vo;
        m.r_tau += res.reward.r_tau;
        m.r_terrain += res.reward.r_terrain;
        m.r_height += res.reward.r_height;
        m.r_smooth += res.reward.r_smooth;
        const double dh = envs_[e].delta_h();
        dh_sum += dh;
        dh_sq += dh * dh;

        episode_return_[e] += res.reward.total;
        episode_length_[e] += 1;
        if (res.done) {
          ep_return_sum += episode_return_[e];
          ep_length_sum += episode_length_[e];
          ++m.episodes_completed;
          episode_return_[e] = 0.0;
          episode_length_[e] = 0;
          obs_[e] = envs_[e].reset(next_reset_seed(static_cast<int>(e)));
          hidden_[e] = net_.initial_hidden();
        } else {
          obs_[e] = res.obs;
          hidden_[e] = pf.hidden;
        }
        seq.push_back(std::move(tr));
      }
      batch.bootstrap_values.push_back(
          net_.forward(normalizer_.normalize(obs_[e]), hidden_[e]).value);
    }

    const long n_steps = static_cast<long>(envs_.size()) * cfg_.train.segment_length;
    total_steps_ += n_steps;
    m.total_steps = total_steps_;
    m.r_v /= n_steps;
    m.r_vo /= n_steps;
    m.r_tau /= n_steps;
    m.r_terrain /= n_steps;
    m.r_height /= n_steps;
    m.r_smooth /= n_steps;
    m.delta_h_mean = dh_sum / n_steps;
    m.delta_h_std = std::sqrt(std::max(0.0, dh_sq / n_steps - m.delta_h_mean * m.delta_h_mean));
    if (m.episodes_completed > 0) {
      m.mean_return = ep_return_sum / m.episodes_completed;
      m.mean_episode_length =
          static_cast<double>(ep_length_sum) / m.episodes_completed;
    } else {
      // Nothing finished this iteration; report the running partial returns
      // so the log still tracks progress.
      for (std::size_t e = 0; e < envs_.size(); ++e) {
        m.mean_return += episode_return_[e];
        m.mean_episode_length += episode_length_[e];
      }
      m.mean_return /= static_cast<double>(envs_.size());
      m.mean_episode_length /= static_cast<double>(envs_.size());
    }

    compute_advantages(batch, cfg_.train.gamma, cfg_.train.gae_lambda);
    normalize_advantages(batch);
    const PpoStats stats = ppo_update(net_, opt_, batch, cfg_.train, shuffle_rng_);
    m.policy_loss = stats.policy_loss;
    m.value_loss = stats.value_loss;
    m.entropy = stats.entropy;
    m.kl = stats.kl;
    m.clip_fraction = stats.clip_fraction;

    // Stats move only between iterations so every step in a batch was
    // normalized with the same frozen mean/var.
    normalizer_.update(raw_batch);
    return m;
  }

  const std::vector<IterationMetrics>& history() const { return history_; }
  PolicyNet& net() { return net_; }
  const PolicyNet& net() const { return net_; }
  const ObsNormalizer& normalizer() const { return normalizer_; }
  const RunConfig& config() const { return cfg_; }

 private:
  std::uint64_t next_reset_seed(int env_index) {
    return hash_mix(cfg_.seed, static_cast<std::uint64_t>(env_index),
                    0x1000 + reset_counts_[env_index]++);
  }

  RunConfig cfg_;
  PolicyNet net_;
  ObsNormalizer normalizer_;
  Adam opt_;
  Rng shuffle_rng_{0};
  std::vector<Environment> envs_;
  std::vector<Rng> action_rngs_;
  std::vector<std::uint64_t> reset_counts_;
  std::vector<VecX> obs_;
  std::vector<VecX> hidden_;
  std::vector<double> episode_return_;
  std::vector<long> episode_length_;
  std::vector<IterationMetrics> history_;
  long total_steps_ = 0;
};

}  // namespace quadloco
