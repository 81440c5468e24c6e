#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "quadloco/environment.hpp"

namespace quadloco {

/// Policy network shape. Defaults are the desk-scale sizes; tests shrink them
/// to keep finite-difference gradient checks under 200 parameters.
struct PolicyConfig {
  int proprio_dim = kProprioDim;
  int extero_dim = kExteroDim;
  int proprio_latent = 48;
  int extero_latent = 48;
  int hidden_dim = 64;
  int action_dim = kActionDim;
  double init_scale = 0.5;     // orthogonal-ish init gain for dense layers
  double init_log_std = -0.5;  // initial exploration noise, log scale
  double log_std_min = -4.0;
  double log_std_max = 1.0;

  void validate() const {
    if (proprio_dim < 1 || extero_dim < 1 || proprio_latent < 1 ||
        extero_latent < 1 || hidden_dim < 1 || action_dim < 1)
      throw ConfigError("policy: all dimensions must be >= 1");
    if (log_std_min > log_std_max) throw ConfigError("policy: log_std range inverted");
    if (init_log_std < log_std_min || init_log_std > log_std_max)
      throw ConfigError("policy: init_log_std outside clamp range");
  }
};

struct TrainConfig {
  double learning_rate = 3e-4;
  double clip_eps = 0.2;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  int epochs = 4;
  int minibatches = 4;
  double entropy_coef = 0.005;
  double value_coef = 0.5;
  double grad_clip = 1.0;
  double kl_limit = 0.03;  // early-stop ceiling on the per-epoch KL estimate
  int iterations = 300;
  int num_envs = 8;
  int segment_length = 256;  // steps per env per iteration
  int bptt_length = 32;      // truncated-BPTT chunk, never crosses a done
  int checkpoint_every = 50;

  void validate() const {
    if (learning_rate <= 0.0) throw ConfigError("train: learning_rate must be > 0");
    if (!(clip_eps > 0.0 && clip_eps < 1.0))
      throw ConfigError("train: clip_eps must be in (0, 1)");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("train: gamma must be in (0, 1]");
    if (!(gae_lambda > 0.0 && gae_lambda <= 1.0))
      throw ConfigError("train: gae_lambda must be in (0, 1]");
    if (epochs < 1 || minibatches < 1) throw ConfigError("train: epochs/minibatches >= 1");
    if (entropy_coef < 0.0 || value_coef < 0.0)
      throw ConfigError("train: loss coefficients must be >= 0");
    if (grad_clip <= 0.0) throw ConfigError("train: grad_clip must be > 0");
    if (kl_limit <= 0.0) throw ConfigError("train: kl_limit must be > 0");
    if (iterations < 1 || num_envs < 1 || segment_length < 1 || bptt_length < 1)
      throw ConfigError("train: sizes must be >= 1");
    if (checkpoint_every < 1) throw ConfigError("train: checkpoint_every must be >= 1");
  }
};

/// The whole run in one tree: defaults here, optionally patched by a JSON
/// file, then by command-line flags. Hash of the resolved tree goes into
/// every artifact.
struct RunConfig {
  std::uint64_t seed = 1;
  EnvConfig env;
  PolicyConfig policy;
  TrainConfig train;

  void validate() const {
    env.validate();
    policy.validate();
    train.validate();
  }
};

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace detail {

/// Reads only the keys present in the JSON object, leaving the rest of the
/// target at its current (default) value. Type errors name the field.
class Patch {
 public:
  Patch(const nlohmann::json& j, std::string scope) : j_(j), scope_(std::move(scope)) {
    if (!j_.is_object()) throw ConfigError(scope_ + ": expected a JSON object");
  }

  template <typename T>
  void get(const char* key, T& out) const {
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      it->get_to(out);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(scope_ + "." + key + ": " + e.what());
    }
  }

  void get(const char* key, Vec3& out) const {
    std::array<double, 3> a = {out.x(), out.y(), out.z()};
    get(key, a);
    out = Vec3(a[0], a[1], a[2]);
  }

  void get(const char* key, TerrainFamily& out) const {
    std::string name = family_name(out);
    get(key, name);
    out = family_from_name(name);
  }

  bool has(const char* key) const { return j_.contains(key); }
  const nlohmann::json& raw() const { return j_; }
  const std::string& scope() const { return scope_; }

 private:
  const nlohmann::json& j_;
  std::string scope_;
};

inline Patch sub(const Patch& p, const char* key) {
  return Patch(p.raw().at(key), p.scope() + "." + key);
}

}  // namespace detail

inline void apply_json(const nlohmann::json& j, TgConfig& c, const std::string& scope) {
  detail::Patch p(j, scope);
  p.get("f_base", c.f_base);
  p.get("lift_height", c.lift_height);
  p.get("step_length", c.step_length);
  p.get("base_foot", c.base_foot);
  p.get("dt", c.dt);
  p.get("delta_f_min", c.delta_f_min);
  p.get("delta_f_max", c.delta_f_max);
  p.get("delta_h_min", c.delta_h_min);
  p.get("delta_h_max", c.delta_h_max);
}

inline void apply_json(const nlohmann::json& j, TerrainSpec& c, const std::string& scope) {
  detail::Patch p(j, scope);
  p.get("family", c.family);
  p.get("extent", c.extent);
  p.get("resolution", c.resolution);
  p.get("seed", c.seed);
  p.get("block_size", c.block_size);
  p.get("block_height_var", c.block_height_var);
  p.get("stair_rise", c.stair_rise);
  p.get("stair_run", c.stair_run);
  p.get("stone_size", c.stone_size);
  p.get("stone_gap", c.stone_gap);
  p.get("stone_height_jitter", c.stone_height_jitter);
  p.get("pole_diameter", c.pole_diameter);
  p.get("pole_spacing", c.pole_spacing);
  p.get("pole_height", c.pole_height);
}

inline void apply_json(const nlohmann::json& j, RewardConfig& c, const std::string& scope) {
  detail::Patch p(j, scope);
  p.get("v_l", c.v_l);
  p.get("v_h", c.v_h);
  p.get("w_v", c.w_v);
  p.get("w_vo", c.w_vo);
  p.get("w_tau", c.w_tau);
  p.get("w_terrain", c.w_terrain);
  p.get("w_height", c.w_height);
  p.get("w_smooth", c.w_smooth);
  p.get("h_thre", c.h_thre);
  p.get("f_thre", c.f_thre);
}

inline void apply_json(const nlohmann::json& j, EpisodeConfig& c, const std::string& scope) {
  detail::Patch p(j, scope);
  p.get("max_steps", c.max_steps);
  p.get("theta", c.theta);
  p.get("min_base_height", c.min_base_height);
  p.get("max_tilt", c.max_tilt);
  p.get("gap_fall_z", c.gap_fall_z);
  p.get("distance_cap", c.distance_cap);
}

inline void apply_json(const nlohmann::json& j, PdGains& c, const std::string& scope) {
  detail::Patch p(j, scope);
  p.get("kp", c.kp);
  p.get("kd", c.kd);
  p.get("tau_max", c.tau_max);
}

inline void apply_json(const nlohmann::json& j, SimParams& c, const std::string& scope) {
  detail::Patch p(j, scope);
  p.get("mass", c.mass);
  p.get("inertia", c.inertia);
  p.get("gravity", c.gravity);
  p.get("contact_kn", c.contact_kn);
  p.get("contact_dn", c.contact_dn);
  p.get("contact_fmax", c.contact_fmax);
  p.get("contact_kt", c.contact_kt);
  p.get("contact_dt", c.contact_dt);
  p.get("attitude_kp", c.attitude_kp);
  p.get("attitude_kd", c.attitude_kd);
  p.get("yaw_kd", c.yaw_kd);
  p.get("joint_inertia", c.joint_inertia);
  p.get("n_substeps", c.n_substeps);
  p.get("contact_tol", c.contact_tol);
}

inline void apply_json(const nlohmann::json& j, NoiseSpec& c, const std::string& scope) {
  detail::Patch p(j, scope);
  p.get("enabled", c.enabled);
  p.get("gravity_std", c.gravity_std);
  p.get("angular_velocity_std", c.angular_velocity_std);
  p.get("joint_position_std", c.joint_position_std);
  p.get("joint_velocity_std", c.joint_velocity_std);
  p.get("extero_std", c.extero_std);
  p.get("extero_dropout", c.extero_dropout);
}

inline void apply_json(const nlohmann::json& j, LegGeometry& c, const std::string& scope) {
  detail::Patch p(j, scope);
  p.get("hip_offset", c.hip_offset);
  p.get("thigh_len", c.thigh_len);
  p.get("shank_len", c.shank_len);
}

inline void apply_json(const nlohmann::json& j, JointLimits& c, const std::string& scope) {
  detail::Patch p(j, scope);
  p.get("abduction_lo", c.abduction_lo);
  p.get("abduction_hi", c.abduction_hi);
  p.get("hip_pitch_lo", c.hip_pitch_lo);
  p.get("hip_pitch_hi", c.hip_pitch_hi);
  p.get("knee_lo", c.knee_lo);
  p.get("knee_hi", c.knee_hi);
}

inline void apply_json(const nlohmann::json& j, EnvConfig& c, const std::string& scope) {
  detail::Patch p(j, scope);
  if (p.has("tg")) apply_json(p.raw().at("tg"), c.tg, scope + ".tg");
  if (p.has("terrain")) apply_json(p.raw().at("terrain"), c.terrain, scope + ".terrain");
  if (p.has("reward")) apply_json(p.raw().at("reward"), c.reward, scope + ".reward");
  if (p.has("episode")) apply_json(p.raw().at("episode"), c.episode, scope + ".episode");
  if (p.has("pd")) apply_json(p.raw().at("pd"), c.pd, scope + ".pd");
  if (p.has("sim")) apply_json(p.raw().at("sim"), c.sim, scope + ".sim");
  if (p.has("noise")) apply_json(p.raw().at("noise"), c.noise, scope + ".noise");
  if (p.has("leg")) apply_json(p.raw().at("leg"), c.leg, scope + ".leg");
  if (p.has("limits")) apply_json(p.raw().at("limits"), c.limits, scope + ".limits");
  p.get("hip_x", c.hip_x);
  p.get("hip_y", c.hip_y);
}

inline void apply_json(const nlohmann::json& j, PolicyConfig& c, const std::string& scope) {
  detail::Patch p(j, scope);
  p.get("proprio_dim", c.proprio_dim);
  p.get("extero_dim", c.extero_dim);
  p.get("proprio_latent", c.proprio_latent);
  p.get("extero_latent", c.extero_latent);
  p.get("hidden_dim", c.hidden_dim);
  p.get("action_dim", c.action_dim);
  p.get("init_scale", c.init_scale);
  p.get("init_log_std", c.init_log_std);
  p.get("log_std_min", c.log_std_min);
  p.get("log_std_max", c.log_std_max);
}

inline void apply_json(const nlohmann::json& j, TrainConfig& c, const std::string& scope) {
  detail::Patch p(j, scope);
  p.get("learning_rate", c.learning_rate);
  p.get("clip_eps", c.clip_eps);
  p.get("gamma", c.gamma);
  p.get("gae_lambda", c.gae_lambda);
  p.get("epochs", c.epochs);
  p.get("minibatches", c.minibatches);
  p.get("entropy_coef", c.entropy_coef);
  p.get("value_coef", c.value_coef);
  p.get("grad_clip", c.grad_clip);
  p.get("kl_limit", c.kl_limit);
  p.get("iterations", c.iterations);
  p.get("num_envs", c.num_envs);
  p.get("segment_length", c.segment_length);
  p.get("bptt_length", c.bptt_length);
  p.get("checkpoint_every", c.checkpoint_every);
}

inline void apply_json(const nlohmann::json& j, RunConfig& c, const std::string& scope = "config") {
  detail::Patch p(j, scope);
  p.get("seed", c.seed);
  if (p.has("env")) apply_json(p.raw().at("env"), c.env, scope + ".env");
  if (p.has("policy")) apply_json(p.raw().at("policy"), c.policy, scope + ".policy");
  if (p.has("train")) apply_json(p.raw().at("train"), c.train, scope + ".train");
}

inline nlohmann::json to_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

inline nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
  j["seed"] = c.seed;
  auto& tg = j["env"]["tg"];
  tg["f_base"] = c.env.tg.f_base;
  tg["lift_height"] = c.env.tg.lift_height;
  tg["step_length"] = c.env.tg.step_length;
  tg["base_foot"] = to_json(c.env.tg.base_foot);
  tg["dt"] = c.env.tg.dt;
  tg["delta_f_min"] = c.env.tg.delta_f_min;
  tg["delta_f_max"] = c.env.tg.delta_f_max;
  tg["delta_h_min"] = c.env.tg.delta_h_min;
  tg["delta_h_max"] = c.env.tg.delta_h_max;
  auto& te = j["env"]["terrain"];
  te["family"] = family_name(c.env.terrain.family);
  te["extent"] = c.env.terrain.extent;
  te["resolution"] = c.env.terrain.resolution;
  te["seed"] = c.env.terrain.seed;
  te["block_size"] = c.env.terrain.block_size;
  te["block_height_var"] = c.env.terrain.block_height_var;
  te["stair_rise"] = c.env.terrain.stair_rise;
  te["stair_run"] = c.env.terrain.stair_run;
  te["stone_size"] = c.env.terrain.stone_size;
  te["stone_gap"] = c.env.terrain.stone_gap;
  te["stone_height_jitter"] = c.env.terrain.stone_height_jitter;
  te["pole_diameter"] = c.env.terrain.pole_diameter;
  te["pole_spacing"] = c.env.terrain.pole_spacing;
  te["pole_height"] = c.env.terrain.pole_height;
  auto& rw = j["env"]["reward"];
  rw["v_l"] = c.env.reward.v_l;
  rw["v_h"] = c.env.reward.v_h;
  rw["w_v"] = c.env.reward.w_v;
  rw["w_vo"] = c.env.reward.w_vo;
  rw["w_tau"] = c.env.reward.w_tau;
  rw["w_terrain"] = c.env.reward.w_terrain;
  rw["w_height"] = c.env.reward.w_height;
  rw["w_smooth"] = c.env.reward.w_smooth;
  rw["h_thre"] = c.env.reward.h_thre;
  rw["f_thre"] = c.env.reward.f_thre;
  auto& ep = j["env"]["episode"];
  ep["max_steps"] = c.env.episode.max_steps;
  ep["theta"] = c.env.episode.theta;
  ep["min_base_height"] = c.env.episode.min_base_height;
  ep["max_tilt"] = c.env.episode.max_tilt;
  ep["gap_fall_z"] = c.env.episode.gap_fall_z;
  ep["distance_cap"] = c.env.episode.distance_cap;
  auto& pd = j["env"]["pd"];
  pd["kp"] = c.env.pd.kp;
  pd["kd"] = c.env.pd.kd;
  pd["tau_max"] = c.env.pd.tau_max;
  auto& sm = j["env"]["sim"];
  sm["mass"] = c.env.sim.mass;
  sm["inertia"] = to_json(c.env.sim.inertia);
  sm["gravity"] = c.env.sim.gravity;
  sm["contact_kn"] = c.env.sim.contact_kn;
  sm["contact_dn"] = c.env.sim.contact_dn;
  sm["contact_fmax"] = c.env.sim.contact_fmax;
  sm["contact_kt"] = c.env.sim.contact_kt;
  sm["contact_dt"] = c.env.sim.contact_dt;
  sm["attitude_kp"] = c.env.sim.attitude_kp;
  sm["attitude_kd"] = c.env.sim.attitude_kd;
  sm["yaw_kd"] = c.env.sim.yaw_kd;
  sm["joint_inertia"] = c.env.sim.joint_inertia;
  sm["n_substeps"] = c.env.sim.n_substeps;
  sm["contact_tol"] = c.env.sim.contact_tol;
  auto& no = j["env"]["noise"];
  no["enabled"] = c.env.noise.enabled;
  no["gravity_std"] = c.env.noise.gravity_std;
  no["angular_velocity_std"] = c.env.noise.angular_velocity_std;
  no["joint_position_std"] = c.env.noise.joint_position_std;
  no["joint_velocity_std"] = c.env.noise.joint_velocity_std;
  no["extero_std"] = c.env.noise.extero_std;
  no["extero_dropout"] = c.env.noise.extero_dropout;
  auto& lg = j["env"]["leg"];
  lg["hip_offset"] = c.env.leg.hip_offset;
  lg["thigh_len"] = c.env.leg.thigh_len;
  lg["shank_len"] = c.env.leg.shank_len;
  auto& lm = j["env"]["limits"];
  lm["abduction_lo"] = c.env.limits.abduction_lo;
  lm["abduction_hi"] = c.env.limits.abduction_hi;
  lm["hip_pitch_lo"] = c.env.limits.hip_pitch_lo;
  lm["hip_pitch_hi"] = c.env.limits.hip_pitch_hi;
  lm["knee_lo"] = c.env.limits.knee_lo;
  lm["knee_hi"] = c.env.limits.knee_hi;
  j["env"]["hip_x"] = c.env.hip_x;
  j["env"]["hip_y"] = c.env.hip_y;
  auto& po = j["policy"];
  po["proprio_dim"] = c.policy.proprio_dim;
  po["extero_dim"] = c.policy.extero_dim;
  po["proprio_latent"] = c.policy.proprio_latent;
  po["extero_latent"] = c.policy.extero_latent;
  po["hidden_dim"] = c.policy.hidden_dim;
  po["action_dim"] = c.policy.action_dim;
  po["init_scale"] = c.policy.init_scale;
  po["init_log_std"] = c.policy.init_log_std;
  po["log_std_min"] = c.policy.log_std_min;
  po["log_std_max"] = c.policy.log_std_max;
  auto& tr = j["train"];
  tr["learning_rate"] = c.train.learning_rate;
  tr["clip_eps"] = c.train.clip_eps;
  tr["gamma"] = c.train.gamma;
  tr["gae_lambda"] = c.train.gae_lambda;
  tr["epochs"] = c.train.epochs;
  tr["minibatches"] = c.train.minibatches;
  tr["entropy_coef"] = c.train.entropy_coef;
  tr["value_coef"] = c.train.value_coef;
  tr["grad_clip"] = c.train.grad_clip;
  tr["kl_limit"] = c.train.kl_limit;
  tr["iterations"] = c.train.iterations;
  tr["num_envs"] = c.train.num_envs;
  tr["segment_length"] = c.train.segment_length;
  tr["bptt_length"] = c.train.bptt_length;
  tr["checkpoint_every"] = c.train.checkpoint_every;
  return j;
}

/// Hash of the fully resolved config; nlohmann keeps object keys sorted, so
/// the compact dump is a canonical encoding.
inline std::string config_hash_hex(const RunConfig& c) {
  const std::uint64_t h = fnv1a64(to_json(c).dump());
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

/// Defaults patched by the file's keys; missing file is an error so a typoed
/// path never silently trains on defaults.
inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("config file not found: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file " + path + ": " + e.what());
  }
  RunConfig cfg;
  apply_json(j, cfg);
  return cfg;
}

inline void save_run_config(const RunConfig& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write config: " + path);
  out << to_json(c).dump(2) << "\n";
}

}  // namespace quadloco
