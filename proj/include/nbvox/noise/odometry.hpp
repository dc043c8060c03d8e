#pragma once

// Odometry-style corruption of a relative motion estimate. The motion is
// split into equal interpolation steps; each step's translation magnitude
// and yaw (rotation about +z) are scaled by independent factors uniform in
// [1 - fraction, 1 + fraction], then the steps are recomposed. Per-step
// errors compound the way wheel odometry drift does: longer decompositions
// wander further. fraction = 0 reproduces the input motion exactly (the
// steps telescope).

#include <cmath>
#include <cstdint>
#include <numbers>

#include "nbvox/core/error.hpp"
#include "nbvox/core/geometry.hpp"
#include "nbvox/core/rng.hpp"

namespace nbvox {

struct OdometryNoiseParams {
  double fraction = 0.05;  // relative error per step component
  int steps = 8;
  std::uint64_t seed = 0;
};

namespace detail {

/// Swing-twist split about +z: q = swing * twist, twist a pure z-rotation.
inline void swing_twist_z(const Quat& q, Quat& swing, Quat& twist) {
  const double mag = std::hypot(q.w(), q.z());
  if (mag < 1e-12) {
    twist = Quat::Identity();  // rotation axis orthogonal to z: no yaw
    swing = q;
    return;
  }
  twist = Quat(q.w() / mag, 0.0, 0.0, q.z() / mag);
  swing = q * twist.conjugate();
}

}  // namespace detail

inline RigidTransform perturb_registration(const RigidTransform& motion,
                                           const OdometryNoiseParams& params) {
  if (!(params.fraction >= 0.0))
    throw ValidationError("noise fraction must be >= 0");
  if (params.steps < 1) throw ValidationError("noise needs at least 1 step");

  Rng rng(params.seed);
  const Quat q_goal = motion.rotation();
  const Vec3 t_goal = motion.translation();

  RigidTransform result;  // accumulated noisy motion
  RigidTransform prev;    // exact pose at the previous step
  for (int k = 1; k <= params.steps; ++k) {
    const double s = static_cast<double>(k) / params.steps;
    const RigidTransform exact(Quat::Identity().slerp(s, q_goal), s * t_goal);
    const RigidTransform inc = prev.inverse() * exact;

    const double t_scale = rng.uniform(1.0 - params.fraction,
                                       1.0 + params.fraction);
    const double yaw_scale = rng.uniform(1.0 - params.fraction,
                                         1.0 + params.fraction);

    Quat swing, twist;
    detail::swing_twist_z(inc.rotation(), swing, twist);
    double yaw = 2.0 * std::atan2(twist.z(), twist.w());
    if (yaw > std::numbers::pi) yaw -= 2.0 * std::numbers::pi;
    if (yaw < -std::numbers::pi) yaw += 2.0 * std::numbers::pi;
    const double half = 0.5 * yaw * yaw_scale;
    const Quat twist_noisy(std::cos(half), 0.0, 0.0, std::sin(half));

    const RigidTransform noisy(swing * twist_noisy,
                               inc.translation() * t_scale);
    result = result * noisy;
    prev = exact;
  }
  return result;
}

}  // namespace nbvox
