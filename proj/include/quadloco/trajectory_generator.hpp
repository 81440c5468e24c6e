#pragma once

#include <array>
#include <cmath>

#include "quadloco/common.hpp"
#include "quadloco/kinematics.hpp"

namespace quadloco {

/// Open-loop trot generator. Phase lives in [-pi, pi): negative phase is
/// stance, positive is swing. The policy perturbs the phase rate (delta_f)
/// and the swing apex height (delta_h) every control step.
struct TgConfig {
  double f_base = 2.0 * kPi * 1.25;     // phase rate, rad/s
  double lift_height = 0.12;            // H, nominal swing apex, m
  double step_length = 0.10;            // L, m
  Vec3 base_foot = {0.0, 0.0, -0.28};   // [X, Y, Z] in the horizontal frame
  double dt = 0.025;                    // control period T, s
  double delta_f_min = -0.5 * 2.0 * kPi * 1.25;
  double delta_f_max = 0.5 * 2.0 * kPi * 1.25;
  double delta_h_min = -0.10;
  double delta_h_max = 0.08;

  void validate() const {
    if (f_base <= 0.0) throw ConfigError("tg.f_base must be > 0");
    if (lift_height < 0.0) throw ConfigError("tg.lift_height must be >= 0");
    if (step_length < 0.0) throw ConfigError("tg.step_length must be >= 0");
    if (dt <= 0.0) throw ConfigError("tg.dt must be > 0");
    if (delta_f_min > delta_f_max) throw ConfigError("tg.delta_f range inverted");
    if (delta_h_min > delta_h_max) throw ConfigError("tg.delta_h range inverted");
    if (lift_height + delta_h_min < 0.0)
      throw ConfigError("tg: lift_height + delta_h_min must be >= 0");
  }
};

/// Per-step command into the generator. Residuals are hard-clamped to the
/// configured ranges inside the TG, independent of policy output scale.
struct TgCommand {
  double theta = 0.0;    // command direction, rad, 0 = forward
  double delta_f = 0.0;  // rad/s
  double delta_h = 0.0;  // m
};

struct TgState {
  double phase_lf = 0.0;  // [-pi, pi)

  /// Trot: diagonal pairs in phase, pairs offset by pi.
  std::array<double, kNumLegs> leg_phases() const {
    const double opposite = wrap_angle(phase_lf + kPi);
    std::array<double, kNumLegs> p{};
    p[static_cast<int>(Leg::LF)] = phase_lf;
    p[static_cast<int>(Leg::RR)] = phase_lf;
    p[static_cast<int>(Leg::RF)] = opposite;
    p[static_cast<int>(Leg::LR)] = opposite;
    return p;
  }
};

inline double clamp_delta_f(const TgConfig& cfg, double delta_f) {
  return clamp(delta_f, cfg.delta_f_min, cfg.delta_f_max);
}

inline double clamp_delta_h(const TgConfig& cfg, double delta_h) {
  return clamp(delta_h, cfg.delta_h_min, cfg.delta_h_max);
}

inline TgState advance_phase(const TgState& state, const TgConfig& cfg,
                             const TgCommand& cmd) {
  const double f = cfg.f_base + clamp_delta_f(cfg, cmd.delta_f);
  return TgState{wrap_angle(state.phase_lf + f * cfg.dt)};
}

/// Normalized in-plane displacement: -0.5 at q=0, +0.5 at q=1, monotone.
inline double tg_dl(double q) { return -(2.0 * q * q * q - 3.0 * q * q + 1.0) + 0.5; }

/// Swing height profile. Stance (p <= 0) stays on the ground; the first
/// swing half rises on a smoothstep cubic to the apex at p = pi/2; the
/// second half descends symmetrically, reparameterized with t' = 2p/pi - 1
/// so the branch is continuous at the apex and lands at zero.
inline double tg_dz(double phase, double apex) {
  if (phase <= 0.0) return 0.0;
  if (phase <= kPi / 2.0) {
    const double t = 2.0 * phase / kPi;
    return (-2.0 * t * t * t + 3.0 * t * t) * apex;
  }
  const double t = 2.0 * phase / kPi - 1.0;
  return (2.0 * t * t * t - 3.0 * t * t + 1.0) * apex;
}

inline FootPosition foot_target(double phase, const TgConfig& cfg, const TgCommand& cmd) {
  const double q = std::abs(phase / kPi);
  const double dl = tg_dl(q);
  const double cx = cfg.step_length * std::cos(cmd.theta);
  const double cy = cfg.step_length * std::sin(cmd.theta);
  const double apex = cfg.lift_height + clamp_delta_h(cfg, cmd.delta_h);
  return cfg.base_foot + Vec3(cx * dl, cy * dl, tg_dz(phase, apex));
}

struct JointReference {
  std::array<JointAngles, kNumLegs> angles;
  std::array<bool, kNumLegs> clamped{};  // IK workspace clamp per leg
  bool any_clamped() const {
    return clamped[0] || clamped[1] || clamped[2] || clamped[3];
  }
};

inline JointReference joint_reference(const TgState& state, const TgConfig& cfg,
                                      const TgCommand& cmd,
                                      const std::array<LegGeometry, kNumLegs>& geom) {
  const auto phases = state.leg_phases();
  JointReference ref;
  for (int i = 0; i < kNumLegs; ++i) {
    const IkResult ik = inverse_kinematics(geom[i], foot_target(phases[i], cfg, cmd));
    ref.angles[i] = ik.angles;
    ref.clamped[i] = ik.clamped;
  }
  return ref;
}

}  // namespace quadloco
