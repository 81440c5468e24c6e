#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "quadloco/common.hpp"
#include "quadloco/rng.hpp"
#include "quadloco/terrain.hpp"

namespace quadloco {

inline constexpr std::array<int, 4> kRingCounts = {1, 6, 8, 10};
inline constexpr std::array<double, 4> kRingRadii = {0.0, 0.03, 0.06, 0.10};
inline constexpr int kSamplesPerFoot = 25;  // sum of kRingCounts
inline constexpr int kExteroDim = kNumLegs * kSamplesPerFoot;
inline constexpr int kProprioDim = 88;
inline constexpr int kObservationDim = kProprioDim + kExteroDim;

/// Raw terrain readings around each foot: z = foot height minus sampled
/// elevation. Unclipped here so the reward terms can use the true values;
/// clipping to +-1 m happens only when the observation vector is assembled.
struct ExteroState {
  std::array<std::array<double, kSamplesPerFoot>, kNumLegs> samples{};

  VecX flat() const {
    VecX out(kExteroDim);
    for (int leg = 0; leg < kNumLegs; ++leg)
      for (int j = 0; j < kSamplesPerFoot; ++j)
        out[leg * kSamplesPerFoot + j] = samples[leg][j];
    return out;
  }
};

/// World-frame xy offsets of the 25 ring points for a given body yaw,
/// ordered ring by ring, each ring swept counterclockwise from body-forward.
inline std::array<Eigen::Vector2d, kSamplesPerFoot> ring_offsets(double yaw) {
  std::array<Eigen::Vector2d, kSamplesPerFoot> pts;
  int k = 0;
  for (int ring = 0; ring < 4; ++ring) {
    const int count = kRingCounts[ring];
    const double radius = kRingRadii[ring];
    for (int s = 0; s < count; ++s) {
      const double az = yaw + 2.0 * kPi * s / count;
      pts[k++] = Eigen::Vector2d(radius * std::cos(az), radius * std::sin(az));
    }
  }
  return pts;
}

inline ExteroState sample_rings(const HeightField& field,
                                const std::array<Vec3, kNumLegs>& foot_world,
                                double yaw) {
  ExteroState state;
  const auto offsets = ring_offsets(yaw);
  for (int leg = 0; leg < kNumLegs; ++leg) {
    const Vec3& foot = foot_world[leg];
    for (int j = 0; j < kSamplesPerFoot; ++j) {
      const double hx = foot.x() + offsets[j].x();
      const double hy = foot.y() + offsets[j].y();
      state.samples[leg][j] = foot.z() - field.height_at(hx, hy);
    }
  }
  return state;
}

struct ProprioState {
  Vec3 command = Vec3::Zero();          // (cos theta, sin theta, 0)
  Vec3 gravity_body = -Vec3::UnitZ();   // unit gravity direction in body frame
  Vec3 angular_velocity = Vec3::Zero(); // body frame, rad/s
  Vec12 joint_positions = Vec12::Zero();
  Vec12 joint_velocities = Vec12::Zero();
  Vec14 action_prev1 = Vec14::Zero();   // a_{t-1}
  Vec14 action_prev2 = Vec14::Zero();   // a_{t-2}
  double tg_frequency = 0.0;            // f_base + delta_f, rad/s
  double phase_sin = 0.0;
  double phase_cos = 1.0;
  Vec12 foot_target_prev1 = Vec12::Zero();  // desired foot positions, t-1
  Vec12 foot_target_prev2 = Vec12::Zero();  // desired foot positions, t-2
};

/// Training-time observation randomization. Disabled by default; scales are
/// additive Gaussian noise per channel group, dropout zeroes a terrain sample.
struct NoiseSpec {
  bool enabled = false;
  double gravity_std = 0.0;
  double angular_velocity_std = 0.0;
  double joint_position_std = 0.0;
  double joint_velocity_std = 0.0;
  double extero_std = 0.0;
  double extero_dropout = 0.0;  // probability per sample
};

inline constexpr double kExteroClip = 1.0;

struct ObservationSegment {
  std::string name;
  int offset;
  int length;
};

inline const std::vector<ObservationSegment>& observation_layout() {
  static const std::vector<ObservationSegment> layout = {
      {"command", 0, 3},
      {"gravity", 3, 3},
      {"angular_velocity", 6, 3},
      {"joint_positions", 9, 12},
      {"joint_velocities", 21, 12},
      {"action_history", 33, 28},
      {"tg_frequency", 61, 1},
      {"tg_phase", 62, 2},
      {"foot_target_history", 64, 24},
      {"extero", 88, 100},
  };
  return layout;
}

inline VecX build_observation(const ProprioState& proprio, const ExteroState& extero,
                              const NoiseSpec& noise, Rng& rng) {
  VecX obs(kObservationDim);
  int k = 0;
  auto put = [&](double v) { obs[k++] = v; };

  put(proprio.command.x());
  put(proprio.command.y());
  put(proprio.command.z());
  for (int i = 0; i < 3; ++i)
    put(proprio.gravity_body[i] +
        (noise.enabled ? noise.gravity_std * rng.normal() : 0.0));
  for (int i = 0; i < 3; ++i)
    put(proprio.angular_velocity[i] +
        (noise.enabled ? noise.angular_velocity_std * rng.normal() : 0.0));
  for (int i = 0; i < kNumJoints; ++i)
    put(proprio.joint_positions[i] +
        (noise.enabled ? noise.joint_position_std * rng.normal() : 0.0));
  for (int i = 0; i < kNumJoints; ++i)
    put(proprio.joint_velocities[i] +
        (noise.enabled ? noise.joint_velocity_std * rng.normal() : 0.0));
  for (int i = 0; i < kActionDim; ++i) put(proprio.action_prev1[i]);
  for (int i = 0; i < kActionDim; ++i) put(proprio.action_prev2[i]);
  put(proprio.tg_frequency);
  put(proprio.phase_sin);
  put(proprio.phase_cos);
  for (int i = 0; i < kNumJoints; ++i) put(proprio.foot_target_prev1[i]);
  for (int i = 0; i < kNumJoints; ++i) put(proprio.foot_target_prev2[i]);

  for (int leg = 0; leg < kNumLegs; ++leg) {
    for (int j = 0; j < kSamplesPerFoot; ++j) {
      double z = extero.samples[leg][j];
      if (noise.enabled) {
        if (noise.extero_dropout > 0.0 && rng.uniform() < noise.extero_dropout)
          z = 0.0;
        else
          z += noise.extero_std * rng.normal();
      }
      put(clamp(z, -kExteroClip, kExteroClip));
    }
  }
  if (k != kObservationDim) throw ConfigError("observation layout mismatch");
  return obs;
}

}  // namespace quadloco
