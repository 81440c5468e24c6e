#pragma once

#include <cmath>
#include <sstream>

#include "quadloco/common.hpp"

namespace quadloco {

/// Foot position expressed in the leg's horizontal frame: gravity-leveled,
/// body-yaw-aligned, origin at the hip-abduction axis. x forward, y left,
/// z up. All kinematics in this module live in this frame.
using FootPosition = Vec3;

/// 3-DOF leg: hip abduction about the x axis, then hip pitch and knee about
/// the (abducted) y axis. hip_offset is the lateral distance from the
/// abduction axis to the sagittal leg plane; mirror is +1 for left legs and
/// -1 for right legs.
struct LegGeometry {
  double hip_offset = 0.08;
  double thigh_len = 0.21;
  double shank_len = 0.21;
  double mirror = 1.0;

  void validate() const {
    if (hip_offset <= 0.0 || thigh_len <= 0.0 || shank_len <= 0.0)
      throw ConfigError("leg geometry: all lengths must be positive");
    if (std::abs(thigh_len - shank_len) >= thigh_len + shank_len)
      throw ConfigError("leg geometry: empty reachable annulus");
    if (mirror != 1.0 && mirror != -1.0)
      throw ConfigError("leg geometry: mirror must be +1 or -1");
  }
};

/// Joint angles in radians. hip_pitch = 0 puts the thigh straight down,
/// positive swings it forward. knee = 0 is full extension; the knee bends
/// backward (positive knee moves the foot rearward of the thigh line).
struct JointAngles {
  double abduction = 0.0;
  double hip_pitch = 0.0;
  double knee = 0.0;
};

struct JointLimits {
  double abduction_lo = -0.6, abduction_hi = 0.6;
  double hip_pitch_lo = -1.5, hip_pitch_hi = 1.5;
  double knee_lo = 0.3, knee_hi = 2.6;

  JointAngles clamp(const JointAngles& a) const {
    return {quadloco::clamp(a.abduction, abduction_lo, abduction_hi),
            quadloco::clamp(a.hip_pitch, hip_pitch_lo, hip_pitch_hi),
            quadloco::clamp(a.knee, knee_lo, knee_hi)};
  }
};

inline FootPosition forward_kinematics(const LegGeometry& geom, const JointAngles& a) {
  const double sb = std::sin(a.hip_pitch), cb = std::cos(a.hip_pitch);
  const double ss = std::sin(a.hip_pitch - a.knee), cs = std::cos(a.hip_pitch - a.knee);
  const double px = geom.thigh_len * sb + geom.shank_len * ss;
  const double pz = -(geom.thigh_len * cb + geom.shank_len * cs);
  const double py = geom.mirror * geom.hip_offset;
  const double ca = std::cos(a.abduction), sa = std::sin(a.abduction);
  return {px, ca * py - sa * pz, sa * py + ca * pz};
}

/// Foot Jacobian d(foot)/d(abduction, hip_pitch, knee) in the horizontal frame.
inline Mat3 leg_jacobian(const LegGeometry& geom, const JointAngles& a) {
  const double sb = std::sin(a.hip_pitch), cb = std::cos(a.hip_pitch);
  const double ss = std::sin(a.hip_pitch - a.knee), cs = std::cos(a.hip_pitch - a.knee);
  const double px = geom.thigh_len * sb + geom.shank_len * ss;
  const double pz = -(geom.thigh_len * cb + geom.shank_len * cs);
  const double py = geom.mirror * geom.hip_offset;
  const double ca = std::cos(a.abduction), sa = std::sin(a.abduction);

  const double dpx_db = geom.thigh_len * cb + geom.shank_len * cs;
  const double dpz_db = geom.thigh_len * sb + geom.shank_len * ss;
  const double dpx_dg = -geom.shank_len * cs;
  const double dpz_dg = -geom.shank_len * ss;

  Mat3 j;
  // abduction column: rotation of the leg plane about x
  j(0, 0) = 0.0;
  j(1, 0) = -sa * py - ca * pz;
  j(2, 0) = ca * py - sa * pz;
  // pitch/knee columns act in the leg plane, then rotate with abduction
  j(0, 1) = dpx_db;
  j(1, 1) = -sa * dpz_db;
  j(2, 1) = ca * dpz_db;
  j(0, 2) = dpx_dg;
  j(1, 2) = -sa * dpz_dg;
  j(2, 2) = ca * dpz_dg;
  return j;
}

struct IkResult {
  JointAngles angles;
  bool clamped = false;     // target was outside the workspace
  FootPosition reached;     // FK of the returned angles (nearest reachable point)
};

struct OutOfWorkspace : std::runtime_error {
  FootPosition target;
  FootPosition nearest_reachable;
  OutOfWorkspace(const FootPosition& t, const FootPosition& n)
      : std::runtime_error(make_msg(t, n)), target(t), nearest_reachable(n) {}

 private:
  static std::string make_msg(const FootPosition& t, const FootPosition& n) {
    std::ostringstream os;
    os << "IK target out of workspace: (" << t.x() << ", " << t.y() << ", " << t.z()
       << "), nearest reachable (" << n.x() << ", " << n.y() << ", " << n.z() << ")";
    return os.str();
  }
};

inline constexpr double kWorkspaceMargin = 5e-5;

/// Analytic IK with a fixed knee-backward branch (knee angle >= 0 across the
/// whole workspace). Unreachable targets are clamped to the nearest reachable
/// point and flagged; the control loop proceeds with the clamped solution
/// while strict callers turn the flag into OutOfWorkspace.
inline IkResult inverse_kinematics(const LegGeometry& geom, const FootPosition& target) {
  const double l1 = geom.thigh_len, l2 = geom.shank_len, d = geom.hip_offset;
  const double r_min = std::abs(l1 - l2) + kWorkspaceMargin;
  const double r_max = l1 + l2 - kWorkspaceMargin;

  bool clamped = false;
  double y = target.y(), z = target.z();
  double r_yz = std::hypot(y, z);
  if (r_yz < d) {
    clamped = true;
    if (r_yz < 1e-12) {
      y = geom.mirror * d;
      z = 0.0;
    } else {
      y *= d / r_yz;
      z *= d / r_yz;
    }
    r_yz = d;
  }

  // In-plane coordinates: foot below the abducted hip axis.
  double x = target.x();
  double zp = -std::sqrt(std::max(r_yz * r_yz - d * d, 0.0));
  double r = std::hypot(x, zp);
  if (r < r_min || r > r_max) {
    clamped = true;
    if (r < 1e-12) {
      x = 0.0;
      zp = -r_min;
    } else {
      const double s = quadloco::clamp(r, r_min, r_max) / r;
      x *= s;
      zp *= s;
    }
    r = std::hypot(x, zp);
  }

  const double cos_knee =
      quadloco::clamp((r * r - l1 * l1 - l2 * l2) / (2.0 * l1 * l2), -1.0, 1.0);
  const double knee = std::acos(cos_knee);
  const double sin_knee = std::sin(knee);
  const double hip_pitch = wrap_angle(std::atan2(zp, x) + kPi / 2.0 +
                                      std::atan2(l2 * sin_knee, l1 + l2 * cos_knee));

  const double abduction =
      wrap_angle(std::atan2(z, y) - std::atan2(zp, geom.mirror * d));

  IkResult res;
  res.angles = {abduction, hip_pitch, knee};
  res.clamped = clamped;
  res.reached = forward_kinematics(geom, res.angles);
  return res;
}

/// Strict-mode IK: throws instead of silently clamping. Test and debug use.
inline JointAngles inverse_kinematics_strict(const LegGeometry& geom,
                                             const FootPosition& target) {
  IkResult res = inverse_kinematics(geom, target);
  if (res.clamped) throw OutOfWorkspace(target, res.reached);
  return res.angles;
}

}  // namespace quadloco
