#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "quadloco/common.hpp"
#include "quadloco/kinematics.hpp"
#include "quadloco/observation.hpp"
#include "quadloco/reward.hpp"
#include "quadloco/rng.hpp"
#include "quadloco/terrain.hpp"
#include "quadloco/trajectory_generator.hpp"

namespace quadloco {

struct NotReset : std::logic_error {
  NotReset() : std::logic_error("environment stepped before reset") {}
};

struct NonFiniteAction : std::runtime_error {
  NonFiniteAction() : std::runtime_error("action contains non-finite values") {}
};

struct PdGains {
  double kp = 60.0;
  double kd = 1.5;
  double tau_max = 30.0;

  void validate() const {
    if (kp < 0.0 || kd < 0.0) throw ConfigError("pd gains must be >= 0");
    if (tau_max <= 0.0) throw ConfigError("pd torque limit must be > 0");
  }
};

/// Lumped-trunk model constants. The trunk is one 6-DOF rigid body; legs are
/// massless kinematic chains that transmit ground reaction forces through
/// their Jacobians. Contacts are penalty springs with a tangential anchor
/// (no slip, matching the no-friction-cone scope).
struct SimParams {
  double mass = 10.0;                          // kg
  Vec3 inertia = {0.09, 0.23, 0.28};           // body-frame diagonal, kg m^2
  double gravity = 9.81;
  double contact_kn = 6.0e5;    // normal spring, N/m
  double contact_dn = 600.0;    // normal damping, N s/m
  double contact_fmax = 600.0;  // normal force cap, N (tames riser-edge spikes)
  double contact_kt = 4.0e3;    // tangential anchor spring, N/m
  double contact_dt = 50.0;     // tangential damping, N s/m
  double attitude_kp = 60.0;    // trunk leveling spring, N m/rad
  double attitude_kd = 6.0;     // and damper, N m s/rad
  double yaw_kd = 1.0;          // slow yaw drift damping, N m s/rad
  double joint_inertia = 0.05;  // effective per-joint inertia, kg m^2
  int n_substeps = 20;
  double contact_tol = 1e-3;    // max tolerated penetration, m

  void validate() const {
    if (mass <= 0.0 || inertia.minCoeff() <= 0.0)
      throw ConfigError("sim: mass and inertia must be positive");
    if (joint_inertia <= 0.0) throw ConfigError("sim: joint inertia must be positive");
    if (n_substeps < 1) throw ConfigError("sim: need at least one substep");
  }
};

enum class Termination { None, MaxSteps, BaseTooLow, TiltTooLarge, FellInGap };

inline const char* termination_name(Termination t) {
  switch (t) {
    case Termination::None: return "none";
    case Termination::MaxSteps: return "max_steps";
    case Termination::BaseTooLow: return "base_too_low";
    case Termination::TiltTooLarge: return "tilt_too_large";
    case Termination::FellInGap: return "fell_in_gap";
  }
  return "?";
}

struct EpisodeConfig {
  int max_steps = 1000;
  double theta = 0.0;             // command direction, rad, world frame
  double min_base_height = 0.15;  // above terrain, m
  double max_tilt = 0.8;          // rad
  double gap_fall_z = -0.3;       // world z below which a foot in a gap ends it
  double distance_cap = 5.0;      // m, evaluation protocol cap

  void validate() const {
    if (max_steps <= 0) throw ConfigError("episode: max_steps must be > 0");
    if (distance_cap <= 0.0) throw ConfigError("episode: distance cap must be > 0");
  }
};

struct EnvConfig {
  TgConfig tg;
  TerrainSpec terrain;
  RewardConfig reward;
  EpisodeConfig episode;
  PdGains pd;
  SimParams sim;
  NoiseSpec noise;
  LegGeometry leg;                   // left-side template; mirror set per leg
  JointLimits limits;
  double hip_x = 0.18;               // hip placement on the trunk, m
  double hip_y = 0.11;

  void validate() const {
    tg.validate();
    terrain.validate();
    reward.validate();
    episode.validate();
    pd.validate();
    sim.validate();
    leg.validate();
  }
};

struct RobotState {
  Vec3 position = Vec3::Zero();
  Quat orientation = Quat::Identity();
  Vec3 linear_velocity = Vec3::Zero();   // world
  Vec3 angular_velocity = Vec3::Zero();  // world
  Vec12 q = Vec12::Zero();
  Vec12 qv = Vec12::Zero();
  std::array<Vec3, kNumLegs> foot_world{};
  std::array<bool, kNumLegs> contact{};
};

struct StepInfo {
  Termination termination = Termination::None;
  double distance = 0.0;  // travel projected on the command direction, m
  int steps = 0;
};

/// One row of the episode trace; everything needed to replay the reward
/// breakdown offline or to freeze a golden trace.
struct StepRecord {
  double time = 0.0;
  Vec3 base_position = Vec3::Zero();
  Quat base_orientation = Quat::Identity();
  Vec3 base_linear_velocity = Vec3::Zero();
  Vec3 base_angular_velocity = Vec3::Zero();
  Vec12 q = Vec12::Zero();
  Vec12 qv = Vec12::Zero();
  Vec12 tau = Vec12::Zero();
  std::array<Vec3, kNumLegs> foot_world{};
  std::array<bool, kNumLegs> contact{};
  double phase_lf = 0.0;
  double tg_frequency = 0.0;
  double delta_h = 0.0;
  Vec14 action = Vec14::Zero();
  RewardBreakdown reward;
};

class Environment {
 public:
  explicit Environment(const EnvConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    for (int leg = 0; leg < kNumLegs; ++leg) {
      geom_[leg] = cfg_.leg;
      geom_[leg].mirror = (leg == 0 || leg == 2) ? 1.0 : -1.0;  // LF, LR left
    }
    hip_body_[0] = Vec3(cfg_.hip_x, cfg_.hip_y, 0.0);    // LF
    hip_body_[1] = Vec3(cfg_.hip_x, -cfg_.hip_y, 0.0);   // RF
    hip_body_[2] = Vec3(-cfg_.hip_x, cfg_.hip_y, 0.0);   // LR
    hip_body_[3] = Vec3(-cfg_.hip_x, -cfg_.hip_y, 0.0);  // RR
  }

  struct StepResult {
    VecX obs;
    RewardBreakdown reward;
    bool done = false;
    StepInfo info;
  };

  VecX reset(std::uint64_t seed) {
    Rng root(seed);
    TerrainSpec spec = cfg_.terrain;
    spec.seed = hash_mix(spec.seed, seed, 0x7e22a1);
    field_ = generate(spec);
    noise_rng_ = root.split(2);

    state_ = RobotState{};
    tg_ = TgState{root.split(3).uniform(-kPi, kPi)};
    command_ = Vec3(std::cos(cfg_.episode.theta), std::sin(cfg_.episode.theta), 0.0);

    // spawn search: shift the start point until every foot stands on solid
    // ground (stepping stones / poles can have a gap under the default spot)
    Vec3 spawn = Vec3::Zero();
    const double probe = 0.05;
    bool placed = false;
    for (int ring = 0; ring < 40 && !placed; ++ring) {
      for (int ix = -ring; ix <= ring && !placed; ++ix) {
        for (int iy = -ring; iy <= ring && !placed; ++iy) {
          if (std::max(std::abs(ix), std::abs(iy)) != ring) continue;
          const Vec3 candidate(ix * probe, iy * probe, 0.0);
          if (spawn_ok(candidate)) {
            spawn = candidate;
            placed = true;
          }
        }
      }
    }
    if (!placed) throw ConfigError("environment: no valid spawn found on terrain");

    double ground = -1e9;
    for (int leg = 0; leg < kNumLegs; ++leg) {
      const Vec3 foot = spawn + hip_body_[leg] + cfg_.tg.base_foot;
      ground = std::max(ground, field_.height_at(foot.x(), foot.y()));
    }
    state_.position = spawn + Vec3(0.0, 0.0, ground - cfg_.tg.base_foot.z());

    // nominal stance: feet at base_foot under each hip
    for (int leg = 0; leg < kNumLegs; ++leg)
      set_leg(state_.q, leg, inverse_kinematics(geom_[leg], cfg_.tg.base_foot).angles);
    state_.qv.setZero();
    update_feet();
    for (int leg = 0; leg < kNumLegs; ++leg) {
      anchor_[leg] = state_.foot_world[leg].head<2>();
      const double h = field_.height_at(state_.foot_world[leg].x(),
                                        state_.foot_world[leg].y());
      state_.contact[leg] = std::abs(state_.foot_world[leg].z() - h) < 0.02;
      stance_height_[leg] = h;
      in_contact_[leg] = false;
      spring_loaded_[leg] = false;
    }
    reward_contact_ = state_.contact;

    steps_ = 0;
    start_xy_ = state_.position.head<2>();
    max_distance_ = 0.0;
    done_ = false;
    was_reset_ = true;
    action_prev1_.setZero();
    action_prev2_.setZero();
    delta_f_ = 0.0;
    delta_h_ = 0.0;
    last_tau_.setZero();
    const auto targets = current_targets();
    foot_target_prev1_ = targets;
    foot_target_prev2_ = targets;
    record_ = StepRecord{};
    fill_record(Vec14::Zero());
    return build_obs();
  }

  StepResult step(const Vec14& action) {
    if (!was_reset_) throw NotReset();
    if (done_) throw NotReset();
    if (!action.allFinite()) throw NonFiniteAction();

    // action split: a1 -> delta_f, a2 -> delta_h, a3..14 -> joint residuals
    const double u_f = std::tanh(action[0]);
    const double u_h = std::tanh(action[1]);
    delta_f_ = affine(u_f, cfg_.tg.delta_f_min, cfg_.tg.delta_f_max);
    delta_h_ = affine(u_h, cfg_.tg.delta_h_min, cfg_.tg.delta_h_max);
    Vec12 residual;
    for (int i = 0; i < kNumJoints; ++i)
      residual[i] = kResidualScale * std::tanh(action[2 + i]);

    TgCommand cmd;
    cmd.theta = cfg_.episode.theta - yaw();  // step in the world command direction
    cmd.delta_f = delta_f_;
    cmd.delta_h = delta_h_;
    tg_ = advance_phase(tg_, cfg_.tg, cmd);
    const JointReference ref = joint_reference(tg_, cfg_.tg, cmd, geom_);

    Vec12 q_des;
    for (int leg = 0; leg < kNumLegs; ++leg) {
      const JointAngles a = cfg_.limits.clamp(
          {ref.angles[leg].abduction + residual[3 * leg + 0],
           ref.angles[leg].hip_pitch + residual[3 * leg + 1],
           ref.angles[leg].knee + residual[3 * leg + 2]});
      q_des[3 * leg + 0] = a.abduction;
      q_des[3 * leg + 1] = a.hip_pitch;
      q_des[3 * leg + 2] = a.knee;
    }

    const Vec12 q_prev = state_.q;
    integrate(q_des);

    ++steps_;
    const Eigen::Vector2d delta = state_.position.head<2>() - start_xy_;
    max_distance_ = std::max(max_distance_, delta.dot(command_.head<2>()));

    // reward inputs
    RewardStepData rd;
    rd.base_velocity = state_.linear_velocity;
    rd.command = command_;
    rd.torque = last_tau_;
    rd.joint_velocity = state_.qv;
    // Stance for the reward: a clean contact flag decides; a loaded spring
    // deeper than the tolerance (riser jam) is ambiguous, so the gait phase
    // decides instead.
    const auto phases = tg_.leg_phases();
    rd.extero = sample_rings(field_, state_.foot_world, yaw());
    rd.delta_h = delta_h_;
    for (int leg = 0; leg < kNumLegs; ++leg) {
      rd.contact[leg] = state_.contact[leg] ||
                        (spring_loaded_[leg] && phases[leg] <= 0.0);
      if (rd.contact[leg])
        stance_height_[leg] = field_.height_at(state_.foot_world[leg].x(),
                                               state_.foot_world[leg].y());
      rd.local_rise[leg] = local_rise(rd.extero, leg);
    }
    reward_contact_ = rd.contact;
    rd.joint_position = state_.q;
    rd.joint_position_prev = q_prev;
    RewardConfig rcfg = cfg_.reward;
    rcfg.tg_lift_height = cfg_.tg.lift_height;
    const RewardBreakdown breakdown = total_reward(rd, rcfg);

    StepResult out;
    out.reward = breakdown;
    out.info.termination = check_termination();
    out.info.steps = steps_;
    out.info.distance = std::min(max_distance_, cfg_.episode.distance_cap);
    done_ = out.info.termination != Termination::None;
    out.done = done_;

    action_prev2_ = action_prev1_;
    action_prev1_ = action;
    foot_target_prev2_ = foot_target_prev1_;
    foot_target_prev1_ = tg_targets_flat(cmd);
    extero_cache_ = rd.extero;
    record_.reward = breakdown;
    fill_record(action);
    out.obs = build_obs();
    return out;
  }

  const RobotState& state() const { return state_; }
  const HeightField& terrain() const { return field_; }
  const TgState& tg_state() const { return tg_; }
  double delta_h() const { return delta_h_; }
  double delta_f() const { return delta_f_; }
  double tg_frequency() const { return cfg_.tg.f_base + delta_f_; }
  const StepRecord& last_record() const { return record_; }
  const EnvConfig& config() const { return cfg_; }
  double yaw() const {
    const Mat3 R = state_.orientation.toRotationMatrix();
    return std::atan2(R(1, 0), R(0, 0));
  }
  double max_distance() const { return max_distance_; }
  bool done() const { return done_; }

  static constexpr double kResidualScale = 0.3;  // rad, residual clamp

 private:
  static double affine(double u, double lo, double hi) {
    return lo + 0.5 * (u + 1.0) * (hi - lo);
  }

  static void set_leg(Vec12& q, int leg, const JointAngles& a) {
    q[3 * leg + 0] = a.abduction;
    q[3 * leg + 1] = a.hip_pitch;
    q[3 * leg + 2] = a.knee;
  }

  JointAngles leg_angles(const Vec12& q, int leg) const {
    return {q[3 * leg + 0], q[3 * leg + 1], q[3 * leg + 2]};
  }

  bool spawn_ok(const Vec3& spawn) const {
    for (int leg = 0; leg < kNumLegs; ++leg) {
      const Vec3 foot = spawn + hip_body_[leg] + cfg_.tg.base_foot;
      if (field_.is_gap(foot.x(), foot.y())) return false;
    }
    return !field_.is_gap(spawn.x(), spawn.y());
  }

  void update_feet() {
    const Mat3 R = state_.orientation.toRotationMatrix();
    const Mat3 Ry = yaw_rotation();
    for (int leg = 0; leg < kNumLegs; ++leg) {
      const Vec3 hip = state_.position + R * hip_body_[leg];
      state_.foot_world[leg] = hip + Ry * forward_kinematics(geom_[leg], leg_angles(state_.q, leg));
    }
  }

  Mat3 yaw_rotation() const {
    const double y = yaw();
    Mat3 Ry;
    Ry << std::cos(y), -std::sin(y), 0.0, std::sin(y), std::cos(y), 0.0, 0.0, 0.0, 1.0;
    return Ry;
  }

  void integrate(const Vec12& q_des) {
    const double h = cfg_.tg.dt / cfg_.sim.n_substeps;
    const SimParams& sp = cfg_.sim;

    for (int sub = 0; sub < sp.n_substeps; ++sub) {
      const Mat3 R = state_.orientation.toRotationMatrix();
      const Mat3 Ry = yaw_rotation();

      // PD torques
      Vec12 tau;
      for (int i = 0; i < kNumJoints; ++i)
        tau[i] = clamp(cfg_.pd.kp * (q_des[i] - state_.q[i]) - cfg_.pd.kd * state_.qv[i],
                       -cfg_.pd.tau_max, cfg_.pd.tau_max);

      // contacts and their reactions
      Vec3 force = Vec3(0.0, 0.0, -sp.mass * sp.gravity);
      Vec3 torque = Vec3::Zero();
      Vec12 tau_reaction = Vec12::Zero();
      for (int leg = 0; leg < kNumLegs; ++leg) {
        const Vec3 hip = state_.position + R * hip_body_[leg];
        const JointAngles a = leg_angles(state_.q, leg);
        const Vec3 local = forward_kinematics(geom_[leg], a);
        const Vec3 foot = hip + Ry * local;
        const Mat3 jac = leg_jacobian(geom_[leg], a);
        const Vec3 foot_vel = state_.linear_velocity +
                              state_.angular_velocity.cross(foot - state_.position) +
                              Ry * (jac * state_.qv.segment<3>(3 * leg));
        const double ground = field_.height_at(foot.x(), foot.y());
        const double pen = ground - foot.z();
        if (pen > 0.0) {
          if (!in_contact_[leg]) anchor_[leg] = foot.head<2>();
          double fz = sp.contact_kn * pen - sp.contact_dn * foot_vel.z();
          fz = clamp(fz, 0.0, sp.contact_fmax);
          const Eigen::Vector2d slip = foot.head<2>() - anchor_[leg];
          const Eigen::Vector2d ft =
              -sp.contact_kt * slip - sp.contact_dt * foot_vel.head<2>();
          const Vec3 f(ft.x(), ft.y(), fz);
          force += f;
          torque += (foot - state_.position).cross(f);
          tau_reaction.segment<3>(3 * leg) += jac.transpose() * (Ry.transpose() * f);
          in_contact_[leg] = true;
        } else {
          in_contact_[leg] = false;
        }
      }

      // trunk leveling spring-damper (keeps the lumped model upright in trot;
      // stands in for the stabilizing moments full leg dynamics would give)
      const Vec3 z_body = R.col(2);
      Vec3 att = sp.attitude_kp * z_body.cross(Vec3::UnitZ());
      att.x() -= sp.attitude_kd * state_.angular_velocity.x();
      att.y() -= sp.attitude_kd * state_.angular_velocity.y();
      att.z() -= sp.yaw_kd * state_.angular_velocity.z();
      torque += att;

      // trunk integration (semi-implicit Euler)
      state_.linear_velocity += (h / sp.mass) * force;
      state_.position += h * state_.linear_velocity;
      const Vec3 w_body = R.transpose() * state_.angular_velocity;
      const Vec3 tau_body = R.transpose() * torque;
      const Vec3 I = sp.inertia;
      Vec3 w_dot;
      w_dot.x() = (tau_body.x() - (I.z() - I.y()) * w_body.y() * w_body.z()) / I.x();
      w_dot.y() = (tau_body.y() - (I.x() - I.z()) * w_body.z() * w_body.x()) / I.y();
      w_dot.z() = (tau_body.z() - (I.y() - I.x()) * w_body.x() * w_body.y()) / I.z();
      const Vec3 w_body_next = w_body + h * w_dot;
      state_.angular_velocity = R * w_body_next;
      Quat dq;
      const Vec3 half = 0.5 * h * w_body_next;
      dq.w() = 1.0;
      dq.vec() = half;
      state_.orientation = (state_.orientation * dq).normalized();

      // joints (massless legs: effective inertia lumps leg + rotor)
      for (int i = 0; i < kNumJoints; ++i) {
        state_.qv[i] += (h / sp.joint_inertia) * (tau[i] + tau_reaction[i]);
        state_.q[i] += h * state_.qv[i];
      }
      for (int leg = 0; leg < kNumLegs; ++leg) {
        const JointAngles clamped = cfg_.limits.clamp(leg_angles(state_.q, leg));
        for (int j = 0; j < 3; ++j) {
          const double before = state_.q[3 * leg + j];
          const double after = j == 0 ? clamped.abduction
                               : j == 1 ? clamped.hip_pitch
                                        : clamped.knee;
          if (after != before) state_.qv[3 * leg + j] = 0.0;
          state_.q[3 * leg + j] = after;
        }
      }
      last_tau_ = tau;
    }

    update_feet();
    // The reported flag means "standing at the surface": spring loaded and no
    // deeper than the contact tolerance. A foot jammed into a step riser keeps
    // its spring force but is not a clean surface contact.
    for (int leg = 0; leg < kNumLegs; ++leg) {
      const Vec3& foot = state_.foot_world[leg];
      const double pen = field_.height_at(foot.x(), foot.y()) - foot.z();
      state_.contact[leg] = in_contact_[leg] && pen <= sp.contact_tol;
      spring_loaded_[leg] = in_contact_[leg];
    }
  }

  Termination check_termination() const {
    if (steps_ >= cfg_.episode.max_steps) return Termination::MaxSteps;
    const double ground = field_.height_at(state_.position.x(), state_.position.y());
    if (!field_.is_gap(state_.position.x(), state_.position.y()) &&
        state_.position.z() - ground < cfg_.episode.min_base_height)
      return Termination::BaseTooLow;
    const Vec3 z_body = state_.orientation.toRotationMatrix().col(2);
    if (std::acos(clamp(z_body.z(), -1.0, 1.0)) > cfg_.episode.max_tilt)
      return Termination::TiltTooLarge;
    for (int leg = 0; leg < kNumLegs; ++leg) {
      const Vec3& foot = state_.foot_world[leg];
      if (field_.is_gap(foot.x(), foot.y()) && foot.z() < cfg_.episode.gap_fall_z)
        return Termination::FellInGap;
    }
    return Termination::None;
  }

  /// Local terrain rise around a foot: highest non-gap ring sample relative
  /// to the foot's last solid stance point, floored at zero. Recovering the
  /// absolute height from the relative sample reintroduces rounding, so the
  /// gap sentinel is matched with a tolerance well below the float32 grid
  /// spacing near -1.
  double local_rise(const ExteroState& ext, int leg) const {
    const double foot_z = state_.foot_world[leg].z();
    double h_max = -1e9;
    for (int j = 0; j < kSamplesPerFoot; ++j) {
      const double h = foot_z - ext.samples[leg][j];
      if (std::abs(h - field_.gap_value()) < 1e-9) continue;
      h_max = std::max(h_max, h);
    }
    if (h_max < -1e8) return 0.0;
    return std::max(h_max - stance_height_[leg], 0.0);
  }

  Vec12 tg_targets_flat(const TgCommand& cmd) const {
    Vec12 flat;
    const auto phases = tg_.leg_phases();
    for (int leg = 0; leg < kNumLegs; ++leg)
      flat.segment<3>(3 * leg) = foot_target(phases[leg], cfg_.tg, cmd);
    return flat;
  }

  Vec12 current_targets() const {
    TgCommand cmd;
    cmd.theta = cfg_.episode.theta - yaw();
    cmd.delta_f = delta_f_;
    cmd.delta_h = delta_h_;
    return tg_targets_flat(cmd);
  }

  VecX build_obs() {
    const Mat3 R = state_.orientation.toRotationMatrix();
    ProprioState pro;
    pro.command = command_;
    pro.gravity_body = R.transpose() * Vec3(0.0, 0.0, -1.0);
    pro.angular_velocity = R.transpose() * state_.angular_velocity;
    pro.joint_positions = state_.q;
    pro.joint_velocities = state_.qv;
    pro.action_prev1 = action_prev1_;
    pro.action_prev2 = action_prev2_;
    pro.tg_frequency = cfg_.tg.f_base + delta_f_;
    pro.phase_sin = std::sin(tg_.phase_lf);
    pro.phase_cos = std::cos(tg_.phase_lf);
    pro.foot_target_prev1 = foot_target_prev1_;
    pro.foot_target_prev2 = foot_target_prev2_;
    if (steps_ == 0) extero_cache_ = sample_rings(field_, state_.foot_world, yaw());
    return build_observation(pro, extero_cache_, cfg_.noise, noise_rng_);
  }

  void fill_record(const Vec14& action) {
    record_.time = steps_ * cfg_.tg.dt;
    record_.base_position = state_.position;
    record_.base_orientation = state_.orientation;
    record_.base_linear_velocity = state_.linear_velocity;
    record_.base_angular_velocity = state_.angular_velocity;
    record_.q = state_.q;
    record_.qv = state_.qv;
    record_.tau = last_tau_;
    record_.foot_world = state_.foot_world;
    // the stance flag the reward saw, so a trace replay tracks the same
    // per-leg stance heights the environment used
    record_.contact = reward_contact_;
    record_.phase_lf = tg_.phase_lf;
    record_.tg_frequency = cfg_.tg.f_base + delta_f_;
    record_.delta_h = delta_h_;
    record_.action = action;
  }

  EnvConfig cfg_;
  std::array<LegGeometry, kNumLegs> geom_;
  std::array<Vec3, kNumLegs> hip_body_;
  HeightField field_;
  RobotState state_;
  TgState tg_;
  Vec3 command_ = Vec3::UnitX();
  Rng noise_rng_{0};
  std::array<Eigen::Vector2d, kNumLegs> anchor_{};
  std::array<bool, kNumLegs> in_contact_{};
  std::array<bool, kNumLegs> spring_loaded_{};
  std::array<bool, kNumLegs> reward_contact_{};
  std::array<double, kNumLegs> stance_height_{};
  Vec14 action_prev1_ = Vec14::Zero();
  Vec14 action_prev2_ = Vec14::Zero();
  Vec12 foot_target_prev1_ = Vec12::Zero();
  Vec12 foot_target_prev2_ = Vec12::Zero();
  Vec12 last_tau_ = Vec12::Zero();
  ExteroState extero_cache_;
  Eigen::Vector2d start_xy_ = Eigen::Vector2d::Zero();
  double max_distance_ = 0.0;
  double delta_f_ = 0.0;
  double delta_h_ = 0.0;
  int steps_ = 0;
  bool done_ = false;
  bool was_reset_ = false;
  StepRecord record_;
};

}  // namespace quadloco
