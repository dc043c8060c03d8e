#pragma once

// Synthetic depth rendering: one nearest-hit raycast per pixel against a
// triangle mesh. Hits beyond max_range are invalid, matching real sensors
// that report dropout past their rated range.

#include <cmath>
#include <numbers>
#include <vector>

#include "nbvox/core/bvh.hpp"
#include "nbvox/core/geometry.hpp"
#include "nbvox/views/camera.hpp"

namespace nbvox {

inline DepthImage render_depth(const Bvh& scene, const CameraModel& camera) {
  camera.validate();
  DepthImage image(camera);
  const Vec3 origin = camera.position();
  for (int y = 0; y < camera.height; ++y) {
    for (int x = 0; x < camera.width; ++x) {
      const Vec3 dir = camera.pose.rotate(camera.pixel_dir(x, y));
      const auto hit = scene.nearest_hit(origin, dir, 0.0, camera.max_range);
      if (hit) image.at(x, y) = static_cast<float>(hit->t);
    }
  }
  return image;
}

inline DepthImage render_depth(const TriangleMesh& scene,
                               const CameraModel& camera) {
  const Bvh bvh(scene);
  return render_depth(bvh, camera);
}

/// Back-projects valid pixels to 3D points in the camera frame. Point order
/// is row-major over the image.
inline PointCloud depth_to_cloud(const DepthImage& image) {
  PointCloud cloud;
  for (int y = 0; y < image.camera.height; ++y)
    for (int x = 0; x < image.camera.width; ++x) {
      const float d = image.at(x, y);
      if (d <= 0.0f) continue;
      cloud.points.push_back(static_cast<double>(d) *
                             image.camera.pixel_dir(x, y));
    }
  return cloud;
}

inline PointCloud depth_to_world_cloud(const DepthImage& image) {
  return transform_cloud(depth_to_cloud(image), image.camera.pose);
}

/// Eight depth captures from one sensor position, yawing in 45 degree
/// increments (yaw 0 looks along +x), all sharing `pitch_rad` (positive
/// tilts up). Models a sensor spinning in place to map its surroundings.
inline std::vector<DepthImage> capture_panorama(const Bvh& scene,
                                                const Vec3& position,
                                                const CameraModel& intrinsics,
                                                double pitch_rad = 0.0) {
  std::vector<DepthImage> out;
  out.reserve(8);
  for (int k = 0; k < 8; ++k) {
    const double yaw = k * (std::numbers::pi / 4.0);
    const Vec3 forward(std::cos(pitch_rad) * std::cos(yaw),
                       std::cos(pitch_rad) * std::sin(yaw),
                       std::sin(pitch_rad));
    CameraModel cam = intrinsics;
    cam.pose = look_at(position, position + forward);
    out.push_back(render_depth(scene, cam));
  }
  return out;
}

}  // namespace nbvox
