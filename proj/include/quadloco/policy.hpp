#pragma once

#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "quadloco/config.hpp"
#include "quadloco/rng.hpp"

namespace quadloco {

struct LayoutMismatch : ConfigError {
  using ConfigError::ConfigError;
};

struct CheckpointError : IoError {
  using IoError::IoError;
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Recurrent actor-critic: two tanh encoders (proprio, extero) feed a gated
/// recurrent cell; an actor head emits the 14 action means, a critic head the
/// value, and a free state-independent log-std vector sets exploration noise.
/// All math is double precision; reverse-mode gradients are written by hand
/// over this fixed graph so finite differences can audit every parameter.
class PolicyNet {
 public:
  /// One named tensor set; the same struct holds parameters or gradients.
  /// visit() order is the canonical layout for flattening and checkpoints.
  struct Tensors {
    MatX enc_p_w, enc_p_b;
    MatX enc_e_w, enc_e_b;
    MatX gru_wz, gru_uz, gru_bz;
    MatX gru_wr, gru_ur, gru_br;
    MatX gru_wn, gru_un, gru_bn;
    MatX actor_w, actor_b, log_std;
    MatX critic_w, critic_b;

    template <typename F>
    void visit(F&& f) {
      f("enc_p_w", enc_p_w);
      f("enc_p_b", enc_p_b);
      f("enc_e_w", enc_e_w);
      f("enc_e_b", enc_e_b);
      f("gru_wz", gru_wz);
      f("gru_uz", gru_uz);
      f("gru_bz", gru_bz);
      f("gru_wr", gru_wr);
      f("gru_ur", gru_ur);
      f("gru_br", gru_br);
      f("gru_wn", gru_wn);
      f("gru_un", gru_un);
      f("gru_bn", gru_bn);
      f("actor_w", actor_w);
      f("actor_b", actor_b);
      f("log_std", log_std);
      f("critic_w", critic_w);
      f("critic_b", critic_b);
    }

    template <typename F>
    void visit(F&& f) const {
      const_cast<Tensors*>(this)->visit(
          [&](const char* name, MatX& m) { f(name, const_cast<const MatX&>(m)); });
    }
  };

  struct Output {
    VecX mean;
    VecX log_std;
    double value = 0.0;
    VecX hidden;
  };

  /// Everything the backward pass needs about one forward step.
  struct Cache {
    VecX obs_p, obs_e;
    VecX xp, xe;        // encoder outputs, post-tanh
    VecX z, r, n;       // gate activations
    VecX un_h;          // gru_un * h_prev, reused for the reset-gate gradient
    VecX h_prev, h;
  };

  /// Per-step loss gradients with respect to the network outputs.
  struct OutputGrad {
    VecX d_mean;
    VecX d_log_std;
    double d_value = 0.0;
  };

  PolicyNet() = default;

  explicit PolicyNet(const PolicyConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    const int lp = cfg.proprio_latent, le = cfg.extero_latent;
    const int d = lp + le, h = cfg.hidden_dim, a = cfg.action_dim;
    t_.enc_p_w.setZero(lp, cfg.proprio_dim);
    t_.enc_p_b.setZero(lp, 1);
    t_.enc_e_w.setZero(le, cfg.extero_dim);
    t_.enc_e_b.setZero(le, 1);
    t_.gru_wz.setZero(h, d);
    t_.gru_uz.setZero(h, h);
    t_.gru_bz.setZero(h, 1);
    t_.gru_wr.setZero(h, d);
    t_.gru_ur.setZero(h, h);
    t_.gru_br.setZero(h, 1);
    t_.gru_wn.setZero(h, d);
    t_.gru_un.setZero(h, h);
    t_.gru_bn.setZero(h, 1);
    t_.actor_w.setZero(a, h);
    t_.actor_b.setZero(a, 1);
    t_.log_std.setConstant(a, 1, cfg.init_log_std);
    t_.critic_w.setZero(1, h);
    t_.critic_b.setZero(1, 1);
  }

  /// Fan-in-scaled normal init; the actor head starts small so the initial
  /// policy stays close to the raw trajectory generator.
  void init(Rng& rng) {
    t_.visit([&](const char* name, MatX& m) {
      const std::string n = name;
      if (n == "log_std") return;  // already at init_log_std
      if (n.size() > 2 && n.compare(n.size() - 2, 2, "_b") == 0) {
        m.setZero();
        return;
      }
      const double gain = (n == "actor_w") ? 0.1 * cfg_.init_scale : cfg_.init_scale;
      const double scale = gain / std::sqrt(static_cast<double>(m.cols()));
      for (int c = 0; c < m.cols(); ++c)
        for (int r = 0; r < m.rows(); ++r) m(r, c) = scale * rng.normal();
    });
  }

  const PolicyConfig& config() const { return cfg_; }
  Tensors& tensors() { return t_; }
  const Tensors& tensors() const { return t_; }

  VecX initial_hidden() const { return VecX::Zero(cfg_.hidden_dim); }

  Tensors zero_like() const {
    Tensors g = t_;
    g.visit([](const char*, MatX& m) { m.setZero(); });
    return g;
  }

  Output forward(const VecX& obs, const VecX& hidden) const {
    Cache scratch;
    return forward_cached(obs, hidden, scratch);
  }

  Output forward_cached(const VecX& obs, const VecX& hidden, Cache& c) const {
    if (obs.size() != cfg_.proprio_dim + cfg_.extero_dim)
      throw LayoutMismatch("policy: observation size " + std::to_string(obs.size()) +
                           " != " + std::to_string(cfg_.proprio_dim + cfg_.extero_dim));
    if (hidden.size() != cfg_.hidden_dim)
      throw LayoutMismatch("policy: hidden size " + std::to_string(hidden.size()) +
                           " != " + std::to_string(cfg_.hidden_dim));
    c.obs_p = obs.head(cfg_.proprio_dim);
    c.obs_e = obs.tail(cfg_.extero_dim);
    c.xp = (t_.enc_p_w * c.obs_p + t_.enc_p_b.col(0)).array().tanh();
    c.xe = (t_.enc_e_w * c.obs_e + t_.enc_e_b.col(0)).array().tanh();
    VecX x(cfg_.proprio_latent + cfg_.extero_latent);
    x << c.xp, c.xe;
    c.h_prev = hidden;
    c.z = (t_.gru_wz * x + t_.gru_uz * hidden + t_.gru_bz.col(0))
              .unaryExpr([](double v) { return sigmoid(v); });
    c.r = (t_.gru_wr * x + t_.gru_ur * hidden + t_.gru_br.col(0))
              .unaryExpr([](double v) { return sigmoid(v); });
    c.un_h = t_.gru_un * hidden;
    c.n = (t_.gru_wn * x + c.r.cwiseProduct(c.un_h) + t_.gru_bn.col(0)).array().tanh();
    c.h = (VecX::Ones(cfg_.hidden_dim) - c.z).cwiseProduct(c.n) +
          c.z.cwiseProduct(hidden);

    Output out;
    out.mean = t_.actor_w * c.h + t_.actor_b.col(0);
    out.log_std = clamped_log_std();
    out.value = (t_.critic_w * c.h)(0) + t_.critic_b(0, 0);
    out.hidden = c.h;
    return out;
  }

  VecX clamped_log_std() const {
    return t_.log_std.col(0).unaryExpr(
        [this](double v) { return clamp(v, cfg_.log_std_min, cfg_.log_std_max); });
  }

  /// Backpropagation through time over one cached sequence. Gradients are
  /// accumulated into g (callers zero it when starting a fresh batch).
  void backward(const std::vector<Cache>& seq, const std::vector<OutputGrad>& grads,
                Tensors& g) const {
    const int lp = cfg_.proprio_latent;
    const int le = cfg_.extero_latent;
    VecX dh = VecX::Zero(cfg_.hidden_dim);
    for (int t = static_cast<int>(seq.size()) - 1; t >= 0; --t) {
      const Cache& c = seq[t];
      const OutputGrad& og = grads[t];

      // heads
      g.actor_w += og.d_mean * c.h.transpose();
      g.actor_b.col(0) += og.d_mean;
      g.critic_w += og.d_value * c.h.transpose();
      g.critic_b(0, 0) += og.d_value;
      for (int i = 0; i < cfg_.action_dim; ++i) {
        const double raw = t_.log_std(i, 0);
        if (raw > cfg_.log_std_min && raw < cfg_.log_std_max)
          g.log_std(i, 0) += og.d_log_std[i];
      }
      dh += t_.actor_w.transpose() * og.d_mean + t_.critic_w.transpose() * og.d_value;

      // gated cell: h = (1-z).n + z.h_prev
      const VecX dz = dh.cwiseProduct(c.h_prev - c.n);
      const VecX dn = dh.cwiseProduct(VecX::Ones(cfg_.hidden_dim) - c.z);
      VecX dh_prev = dh.cwiseProduct(c.z);

      const VecX dan = dn.cwiseProduct(VecX::Ones(cfg_.hidden_dim) - c.n.cwiseProduct(c.n));
      const VecX dr = dan.cwiseProduct(c.un_h);
      const VecX dun_h = dan.cwiseProduct(c.r);
      const VecX daz = dz.cwiseProduct(c.z).cwiseProduct(VecX::Ones(cfg_.hidden_dim) - c.z);
      const VecX dar = dr.cwiseProduct(c.r).cwiseProduct(VecX::Ones(cfg_.hidden_dim) - c.r);

      VecX x(lp + le);
      x << c.xp, c.xe;
      g.gru_wn += dan * x.transpose();
      g.gru_bn.col(0) += dan;
      g.gru_un += dun_h * c.h_prev.transpose();
      g.gru_wz += daz * x.transpose();
      g.gru_uz += daz * c.h_prev.transpose();
      g.gru_bz.col(0) += daz;
      g.gru_wr += dar * x.transpose();
      g.gru_ur += dar * c.h_prev.transpose();
      g.gru_br.col(0) += dar;

      dh_prev += t_.gru_un.transpose() * dun_h + t_.gru_uz.transpose() * daz +
                 t_.gru_ur.transpose() * dar;
      const VecX dx = t_.gru_wn.transpose() * dan + t_.gru_wz.transpose() * daz +
                      t_.gru_wr.transpose() * dar;

      // encoders
      const VecX dxp = dx.head(lp);
      const VecX dxe = dx.tail(le);
      const VecX dap = dxp.cwiseProduct(VecX::Ones(lp) - c.xp.cwiseProduct(c.xp));
      const VecX dae = dxe.cwiseProduct(VecX::Ones(le) - c.xe.cwiseProduct(c.xe));
      g.enc_p_w += dap * c.obs_p.transpose();
      g.enc_p_b.col(0) += dap;
      g.enc_e_w += dae * c.obs_e.transpose();
      g.enc_e_b.col(0) += dae;

      dh = dh_prev;
    }
  }

  int parameter_count() const {
    int n = 0;
    t_.visit([&](const char*, const MatX& m) { n += static_cast<int>(m.size()); });
    return n;
  }

  VecX flatten() const {
    VecX flat(parameter_count());
    int k = 0;
    t_.visit([&](const char*, const MatX& m) {
      for (int c = 0; c < m.cols(); ++c)
        for (int r = 0; r < m.rows(); ++r) flat[k++] = m(r, c);
    });
    return flat;
  }

  void unflatten(const VecX& flat) {
    if (flat.size() != parameter_count())
      throw LayoutMismatch("policy: flat parameter size mismatch");
    int k = 0;
    t_.visit([&](const char*, MatX& m) {
      for (int c = 0; c < m.cols(); ++c)
        for (int r = 0; r < m.rows(); ++r) m(r, c) = flat[k++];
    });
  }

  static VecX flatten_tensors(const Tensors& t) {
    int n = 0;
    t.visit([&](const char*, const MatX& m) { n += static_cast<int>(m.size()); });
    VecX flat(n);
    int k = 0;
    t.visit([&](const char*, const MatX& m) {
      for (int c = 0; c < m.cols(); ++c)
        for (int r = 0; r < m.rows(); ++r) flat[k++] = m(r, c);
    });
    return flat;
  }

  bool all_finite() const {
    bool ok = true;
    t_.visit([&](const char*, const MatX& m) { ok = ok && m.allFinite(); });
    return ok;
  }

 private:
  PolicyConfig cfg_;
  Tensors t_;
};

/// Per-channel running mean and variance (Welford merge). Stats update once
/// per iteration from the gathered batch, so rollouts inside an iteration all
/// see the same frozen statistics; evaluation never updates them.
class ObsNormalizer {
 public:
  ObsNormalizer() = default;
  explicit ObsNormalizer(int dim)
      : mean_(VecX::Zero(dim)), var_(VecX::Ones(dim)), count_(1e-4) {}

  VecX normalize(const VecX& obs) const {
    VecX out = (obs - mean_).cwiseQuotient((var_.array() + 1e-8).sqrt().matrix());
    for (int i = 0; i < out.size(); ++i) out[i] = clamp(out[i], -10.0, 10.0);
    return out;
  }

  void update(const std::vector<VecX>& batch) {
    if (batch.empty()) return;
    const int dim = static_cast<int>(mean_.size());
    VecX bmean = VecX::Zero(dim);
    for (const VecX& o : batch) bmean += o;
    bmean /= static_cast<double>(batch.size());
    VecX bm2 = VecX::Zero(dim);
    for (const VecX& o : batch) bm2 += (o - bmean).cwiseProduct(o - bmean);

    const double bn = static_cast<double>(batch.size());
    const VecX delta = bmean - mean_;
    const double total = count_ + bn;
    mean_ += delta * (bn / total);
    var_ = (var_ * count_ + bm2 + delta.cwiseProduct(delta) * (count_ * bn / total)) / total;
    count_ = total;
  }

  const VecX& mean() const { return mean_; }
  const VecX& variance() const { return var_; }
  double count() const { return count_; }
  void restore(const VecX& mean, const VecX& var, double count) {
    mean_ = mean;
    var_ = var;
    count_ = count;
  }

 private:
  VecX mean_;
  VecX var_;
  double count_ = 0.0;
};

inline constexpr char kCheckpointMagic[8] = {'Q', 'L', 'C', 'K', 'P', 'T', '0', '1'};

/// Self-describing checkpoint: magic, manifest length, JSON manifest (layer
/// names/shapes, policy dimensions, provenance), then all tensors plus the
/// normalizer state as little-endian float32 in manifest order.
inline void save_checkpoint(const std::string& path, const PolicyNet& net,
                            const ObsNormalizer& norm, const std::string& config_hash) {
  nlohmann::json manifest;
  manifest["tool_version"] = kVersion;
  manifest["config_hash"] = config_hash;
  const PolicyConfig& pc = net.config();
  manifest["policy"] = {{"proprio_dim", pc.proprio_dim},
                        {"extero_dim", pc.extero_dim},
                        {"proprio_latent", pc.proprio_latent},
                        {"extero_latent", pc.extero_latent},
                        {"hidden_dim", pc.hidden_dim},
                        {"action_dim", pc.action_dim},
                        {"init_scale", pc.init_scale},
                        {"init_log_std", pc.init_log_std},
                        {"log_std_min", pc.log_std_min},
                        {"log_std_max", pc.log_std_max}};

  std::vector<float> payload;
  auto append = [&](const char* name, const MatX& m) {
    manifest["tensors"].push_back({{"name", name},
                                   {"rows", m.rows()},
                                   {"cols", m.cols()},
                                   {"offset", payload.size()}});
    for (int c = 0; c < m.cols(); ++c)
      for (int r = 0; r < m.rows(); ++r)
        payload.push_back(static_cast<float>(m(r, c)));
  };
  net.tensors().visit(append);
  const int od = static_cast<int>(norm.mean().size());
  append("obs_mean", Eigen::Map<const MatX>(norm.mean().data(), od, 1));
  append("obs_var", Eigen::Map<const MatX>(norm.variance().data(), od, 1));
  MatX cnt(1, 1);
  cnt(0, 0) = norm.count();
  append("obs_count", cnt);
  manifest["payload_count"] = payload.size();

  const std::string mjson = manifest.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint: " + path);
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  const std::uint32_t mlen = static_cast<std::uint32_t>(mjson.size());
  out.write(reinterpret_cast<const char*>(&mlen), sizeof(mlen));
  out.write(mjson.data(), static_cast<std::streamsize>(mjson.size()));
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size() * sizeof(float)));
}

struct Checkpoint {
  PolicyNet net;
  ObsNormalizer normalizer;
  std::string config_hash;
  std::string tool_version;
};

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot read checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0)
    throw CheckpointError("not a checkpoint file (bad magic): " + path);
  std::uint32_t mlen = 0;
  in.read(reinterpret_cast<char*>(&mlen), sizeof(mlen));
  if (!in) throw CheckpointError("truncated checkpoint manifest: " + path);
  std::string mjson(mlen, '\0');
  in.read(mjson.data(), mlen);
  if (!in) throw CheckpointError("truncated checkpoint manifest: " + path);
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(mjson);
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("checkpoint manifest is not valid JSON: ") + e.what());
  }

  PolicyConfig pc;
  try {
    const auto& p = manifest.at("policy");
    pc.proprio_dim = p.at("proprio_dim").get<int>();
    pc.extero_dim = p.at("extero_dim").get<int>();
    pc.proprio_latent = p.at("proprio_latent").get<int>();
    pc.extero_latent = p.at("extero_latent").get<int>();
    pc.hidden_dim = p.at("hidden_dim").get<int>();
    pc.action_dim = p.at("action_dim").get<int>();
    pc.init_scale = p.at("init_scale").get<double>();
    pc.init_log_std = p.at("init_log_std").get<double>();
    pc.log_std_min = p.at("log_std_min").get<double>();
    pc.log_std_max = p.at("log_std_max").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("checkpoint manifest missing policy fields: ") + e.what());
  }

  const std::size_t count = manifest.value("payload_count", std::size_t{0});
  std::vector<float> payload(count);
  in.read(reinterpret_cast<char*>(payload.data()),
          static_cast<std::streamsize>(count * sizeof(float)));
  if (!in || in.gcount() != static_cast<std::streamsize>(count * sizeof(float)))
    throw CheckpointError("checkpoint payload shorter than manifest declares: " + path);

  Checkpoint ck;
  ck.net = PolicyNet(pc);
  ck.config_hash = manifest.value("config_hash", "");
  ck.tool_version = manifest.value("tool_version", "");

  std::size_t ti = 0;
  const auto& tensors = manifest.at("tensors");
  auto take = [&](const char* name, MatX& m) {
    if (ti >= tensors.size())
      throw CheckpointError(std::string("checkpoint manifest lacks tensor ") + name);
    const auto& e = tensors[ti++];
    if (e.at("name").get<std::string>() != name ||
        e.at("rows").get<Eigen::Index>() != m.rows() ||
        e.at("cols").get<Eigen::Index>() != m.cols())
      throw CheckpointError(std::string("checkpoint tensor mismatch at ") + name +
                            ": manifest says " + e.at("name").get<std::string>() + " " +
                            std::to_string(e.at("rows").get<long>()) + "x" +
                            std::to_string(e.at("cols").get<long>()));
    const std::size_t off = e.at("offset").get<std::size_t>();
    if (off + static_cast<std::size_t>(m.size()) > payload.size())
      throw CheckpointError(std::string("checkpoint payload overrun at ") + name);
    std::size_t k = off;
    for (int c = 0; c < m.cols(); ++c)
      for (int r = 0; r < m.rows(); ++r) m(r, c) = payload[k++];
  };
  ck.net.tensors().visit(take);
  MatX mean(pc.proprio_dim + pc.extero_dim, 1), var(pc.proprio_dim + pc.extero_dim, 1);
  MatX cnt(1, 1);
  take("obs_mean", mean);
  take("obs_var", var);
  take("obs_count", cnt);
  ck.normalizer = ObsNormalizer(pc.proprio_dim + pc.extero_dim);
  ck.normalizer.restore(mean.col(0), var.col(0), cnt(0, 0));
  return ck;
}

}  // namespace quadloco
