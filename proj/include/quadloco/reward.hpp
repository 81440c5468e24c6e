#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include "quadloco/common.hpp"
#include "quadloco/observation.hpp"

namespace quadloco {

struct RewardConfig {
  double v_l = 0.3;  // lower edge of the commanded speed band, m/s
  double v_h = 0.6;  // upper edge, m/s
  double w_v = 1.0;
  double w_vo = 0.3;
  double w_tau = 2e-4;
  double w_terrain = 1.0;
  double w_height = 2.0;
  double w_smooth = 0.3;
  double h_thre = 0.10;        // sample spread above this marks unsafe footing, m
  double f_thre = 0.02;        // clearance margin before apex height is penalized, m
  double tg_lift_height = 0.12;  // swing apex H the generator uses, m

  void validate() const {
    if (!(0.0 <= v_l && v_l < v_h)) throw ConfigError("reward: need 0 <= v_l < v_h");
    if (w_v < 0 || w_vo < 0 || w_tau < 0 || w_terrain < 0 || w_height < 0 || w_smooth < 0)
      throw ConfigError("reward: weights must be >= 0");
    if (h_thre <= 0.0) throw ConfigError("reward: h_thre must be > 0");
    if (f_thre < 0.0) throw ConfigError("reward: f_thre must be >= 0");
  }
};

struct RewardBreakdown {
  double r_v = 0.0;
  double r_vo = 0.0;
  double r_tau = 0.0;
  double r_terrain = 0.0;  // sum over feet, each in {-1, 0}
  double r_height = 0.0;   // sum over feet, each <= 0
  double r_smooth = 0.0;
  double total = 0.0;
};

/// 1 inside the commanded speed band, Gaussian falloff outside. Both the band
/// test and the falloff use the projected speed v.c.
inline double velocity_reward(const Vec3& v, const Vec3& c, const RewardConfig& cfg) {
  const double s = v.dot(c);
  if (s >= cfg.v_l && s <= cfg.v_h) return 1.0;
  const double edge = (s > cfg.v_h) ? cfg.v_h : cfg.v_l;
  const double d = s - edge;
  return std::exp(-2.0 * d * d);
}

/// Penalizes velocity components off the commanded direction.
inline double velocity_out_reward(const Vec3& v, const Vec3& c) {
  const double d = v.dot(v) - v.dot(c);
  return std::exp(-1.5 * d * d);
}

/// Negative mechanical power. Sequential sum keeps the value independent of
/// SIMD accumulation order, so logged rewards are stable across builds.
inline double energy_reward(const Vec12& tau, const Vec12& qv) {
  double power = 0.0;
  for (int i = 0; i < kNumJoints; ++i) power += tau[i] * qv[i];
  return -power;
}

/// -1 per stance foot whose surrounding samples spread more than h_thre
/// (an edge, a riser, or a gap under the ring).
inline double terrain_reward(const std::array<bool, kNumLegs>& contact,
                             const ExteroState& extero, const RewardConfig& cfg) {
  double sum = 0.0;
  for (int leg = 0; leg < kNumLegs; ++leg) {
    if (!contact[leg]) continue;
    const auto& s = extero.samples[leg];
    const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
    if (*hi - *lo > cfg.h_thre) sum -= 1.0;
  }
  return sum;
}

/// Penalizes swing apex in excess of what the local rise requires. delta_height
/// is the per-foot terrain rise around the foot (>= 0), delta_h the policy's
/// apex increment.
inline double lift_height_reward_foot(double delta_h, double delta_height,
                                      const RewardConfig& cfg) {
  return -std::max(cfg.tg_lift_height + delta_h - delta_height - cfg.f_thre, 0.0);
}

inline double lift_height_reward(double delta_h,
                                 const std::array<double, kNumLegs>& delta_height,
                                 const RewardConfig& cfg) {
  double sum = 0.0;
  for (int leg = 0; leg < kNumLegs; ++leg)
    sum += lift_height_reward_foot(delta_h, delta_height[leg], cfg);
  return sum;
}

inline double smoothness_reward(const Vec12& q, const Vec12& q_prev) {
  double ss = 0.0;
  for (int i = 0; i < kNumJoints; ++i) {
    const double d = q[i] - q_prev[i];
    ss += d * d;
  }
  return std::exp(-0.5 * ss);
}

struct RewardStepData {
  Vec3 base_velocity = Vec3::Zero();  // world frame, m/s
  Vec3 command = Vec3::UnitX();
  Vec12 torque = Vec12::Zero();
  Vec12 joint_velocity = Vec12::Zero();
  std::array<bool, kNumLegs> contact{};
  ExteroState extero;
  double delta_h = 0.0;
  std::array<double, kNumLegs> local_rise{};  // per-foot terrain rise, >= 0
  Vec12 joint_position = Vec12::Zero();
  Vec12 joint_position_prev = Vec12::Zero();
};

inline RewardBreakdown total_reward(const RewardStepData& d, const RewardConfig& cfg) {
  RewardBreakdown b;
  b.r_v = velocity_reward(d.base_velocity, d.command, cfg);
  b.r_vo = velocity_out_reward(d.base_velocity, d.command);
  b.r_tau = energy_reward(d.torque, d.joint_velocity);
  b.r_terrain = terrain_reward(d.contact, d.extero, cfg);
  b.r_height = lift_height_reward(d.delta_h, d.local_rise, cfg);
  b.r_smooth = smoothness_reward(d.joint_position, d.joint_position_prev);
  b.total = cfg.w_v * b.r_v + cfg.w_vo * b.r_vo + cfg.w_tau * b.r_tau +
            cfg.w_terrain * b.r_terrain + cfg.w_height * b.r_height +
            cfg.w_smooth * b.r_smooth;
  return b;
}

}  // namespace quadloco
