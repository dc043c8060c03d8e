#pragma once

// Tabletop scene synthesis for evaluation trials: the object is dropped onto
// a pedestal slab at a seeded yaw, resting exactly on the surface with its
// footprint centered. The pedestal is deliberately narrow so cameras at low
// elevation can see past its edge from every azimuth.

#include <cstdint>
#include <numbers>

#include "nbvox/core/geometry.hpp"
#include "nbvox/core/rng.hpp"

namespace nbvox {

/// Axis-aligned box as a closed 12-triangle mesh, outward winding.
inline TriangleMesh make_box(const Vec3& min, const Vec3& max) {
  if (!((max.array() > min.array()).all()))
    throw ValidationError("box extents must be positive");
  TriangleMesh mesh;
  mesh.vertices = {
      {min.x(), min.y(), min.z()}, {max.x(), min.y(), min.z()},
      {max.x(), max.y(), min.z()}, {min.x(), max.y(), min.z()},
      {min.x(), min.y(), max.z()}, {max.x(), min.y(), max.z()},
      {max.x(), max.y(), max.z()}, {min.x(), max.y(), max.z()}};
  mesh.faces = {
      {0, 2, 1}, {0, 3, 2},  // bottom (z = min), outward -z
      {4, 5, 6}, {4, 6, 7},  // top, outward +z
      {0, 1, 5}, {0, 5, 4},  // y = min, outward -y
      {2, 3, 7}, {2, 7, 6},  // y = max, outward +y
      {1, 2, 6}, {1, 6, 5},  // x = max, outward +x
      {3, 0, 4}, {3, 4, 7}   // x = min, outward -x
  };
  return mesh;
}

struct Scene {
  TriangleMesh combined;      // pedestal + posed object, for rendering
  TriangleMesh object_world;  // posed object alone, the ground truth
  RigidTransform object_pose;  // model frame -> world
  double table_height = 0.0;
};

/// Poses the object at a seeded yaw on a pedestal of the given surface
/// height: footprint centered on the world z-axis, lowest vertex exactly at
/// table height.
inline Scene synthesize_scene(const TriangleMesh& object, double table_height,
                              double pedestal_half_extent,
                              double pedestal_thickness,
                              std::uint64_t pose_seed) {
  if (object.vertices.empty())
    throw DegenerateInputError("cannot stage an empty object");
  Rng rng(pose_seed);
  const double yaw = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const RigidTransform spin =
      RigidTransform::from_axis_angle(Vec3::UnitZ(), yaw);
  const TriangleMesh spun = transform_mesh(object, spin);
  const Aabb box = mesh_bounds(spun);
  const Vec3 shift(-box.center().x(), -box.center().y(),
                   table_height - box.min.z());

  Scene scene;
  scene.table_height = table_height;
  scene.object_pose = RigidTransform::translation(shift) * spin;
  scene.object_world = transform_mesh(object, scene.object_pose);
  const TriangleMesh pedestal = make_box(
      Vec3(-pedestal_half_extent, -pedestal_half_extent,
           table_height - pedestal_thickness),
      Vec3(pedestal_half_extent, pedestal_half_extent, table_height));
  scene.combined = merge_meshes(pedestal, scene.object_world);
  return scene;
}

}  // namespace nbvox
