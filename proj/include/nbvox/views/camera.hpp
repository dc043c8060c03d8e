#pragma once

// Pinhole depth camera. Camera frame: x right, y down, z forward (optical
// convention); pose maps camera frame to world. Square pixels; the vertical
// field of view fixes the focal length, width only widens the horizontal
// extent. Depth samples are distances along the pixel ray, not z-depth, and
// 0 marks an invalid (missed or out-of-range) measurement.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "nbvox/core/error.hpp"
#include "nbvox/core/geometry.hpp"
#include "nbvox/core/json.hpp"

namespace nbvox {

struct CameraModel {
  RigidTransform pose;  // camera-to-world
  int width = 320;
  int height = 240;
  double vertical_fov_deg = 60.0;
  double max_range = 4.0;  // meters

  void validate() const {
    if (width < 1 || height < 1)
      throw ValidationError("camera resolution must be positive");
    if (!(vertical_fov_deg > 0.0) || !(vertical_fov_deg < 180.0))
      throw ValidationError("vertical fov must be in (0, 180) degrees");
    if (!(max_range > 0.0))
      throw ValidationError("camera max range must be positive");
  }

  double focal_px() const {
    return (height / 2.0) /
           std::tan(0.5 * vertical_fov_deg * std::numbers::pi / 180.0);
  }

  /// Unit direction through the center of pixel (x, y), camera frame.
  Vec3 pixel_dir(int x, int y) const {
    const double f = focal_px();
    const double px = (x + 0.5 - width / 2.0) / f;
    const double py = (y + 0.5 - height / 2.0) / f;
    return Vec3(px, py, 1.0).normalized();
  }

  Vec3 position() const { return pose.translation(); }

  /// World-frame view direction (camera +z).
  Vec3 view_dir() const { return pose.rotate(Vec3::UnitZ()); }
};

/// Camera pose at `position` with the optical axis through `target`.
/// Throws if the view direction is parallel to `up`.
inline RigidTransform look_at(const Vec3& position, const Vec3& target,
                              const Vec3& up = Vec3::UnitZ()) {
  const Vec3 forward_raw = target - position;
  if (!(forward_raw.norm() > 1e-12))
    throw ValidationError("look_at: target coincides with position");
  const Vec3 z = forward_raw.normalized();
  const Vec3 x_raw = z.cross(up);  // optical x points right, y ends up down
  if (!(x_raw.norm() > 1e-9))
    throw ValidationError("look_at: view direction parallel to up");
  const Vec3 x = x_raw.normalized();
  const Vec3 y = z.cross(x);
  Eigen::Matrix3d rot;
  rot.col(0) = x;
  rot.col(1) = y;
  rot.col(2) = z;
  return RigidTransform(Quat(rot), position);
}

struct DepthImage {
  CameraModel camera;
  std::vector<float> depth;  // row-major, height rows of width samples

  DepthImage() = default;
  explicit DepthImage(const CameraModel& cam)
      : camera(cam),
        depth(static_cast<std::size_t>(cam.width) *
                  static_cast<std::size_t>(cam.height),
              0.0f) {
    camera.validate();
  }

  float at(int x, int y) const {
    return depth[static_cast<std::size_t>(y) *
                     static_cast<std::size_t>(camera.width) +
                 static_cast<std::size_t>(x)];
  }

  float& at(int x, int y) {
    return depth[static_cast<std::size_t>(y) *
                     static_cast<std::size_t>(camera.width) +
                 static_cast<std::size_t>(x)];
  }

  bool valid(int x, int y) const { return at(x, y) > 0.0f; }
};

inline Json to_json(const CameraModel& cam) {
  Json j;
  j["width"] = cam.width;
  j["height"] = cam.height;
  j["vertical_fov_deg"] = cam.vertical_fov_deg;
  j["max_range"] = cam.max_range;
  j["pose"] = to_json(cam.pose);
  return j;
}

inline CameraModel camera_from_json(const Json& j, const std::string& what) {
  CameraModel cam;
  try {
    cam.width = j.at("width").get<int>();
    cam.height = j.at("height").get<int>();
    cam.vertical_fov_deg = j.at("vertical_fov_deg").get<double>();
    cam.max_range = j.at("max_range").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(what + ": " + e.what());
  }
  if (j.contains("pose")) cam.pose = transform_from_json(j["pose"], what);
  cam.validate();
  return cam;
}

}  // namespace nbvox
