#pragma once

// Free-space carving of depth images into voxel label grids. Each pixel ray
// is walked through the grid (Amanatides-Woo); cells whose ray interval ends
// before the measured surface become Empty, the cell containing the surface
// sample becomes Occupied, cells behind it keep Unknown. Rays with invalid
// depth carve Empty out to the camera's max range. A per-pixel object mask
// lets callers treat known-foreign surfaces (e.g. the supporting table) as
// free space boundaries: masked-out hits carve Empty up to and including the
// hit cell and never produce Occupied.
//
// Writes use the precedence Occupied > Empty > Unknown, so results are
// independent of pixel order and the same rule merges grids across views.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

#include "nbvox/core/error.hpp"
#include "nbvox/core/geometry.hpp"
#include "nbvox/views/camera.hpp"
#include "nbvox/voxel/grid.hpp"

namespace nbvox {

enum class VoxelLabel : std::uint8_t { Unknown = 0, Empty = 1, Occupied = 2 };

/// Precedence merge: surface evidence beats free-space evidence beats none.
inline VoxelLabel merge_labels(VoxelLabel a, VoxelLabel b) {
  return a > b ? a : b;
}

struct LabelGrid {
  GridSpec spec;
  std::vector<VoxelLabel> labels;

  LabelGrid() = default;
  explicit LabelGrid(const GridSpec& s)
      : spec(s), labels(s.cell_count(), VoxelLabel::Unknown) {
    spec.validate();
  }

  VoxelLabel get(const Vec3i& c) const { return labels[spec.index(c)]; }

  void raise(std::size_t index, VoxelLabel value) {
    labels[index] = merge_labels(labels[index], value);
  }
};

inline LabelGrid merge_grids(const LabelGrid& a, const LabelGrid& b) {
  if (!(a.spec == b.spec))
    throw ValidationError("label grid merge requires identical specs");
  LabelGrid out(a.spec);
  for (std::size_t i = 0; i < out.labels.size(); ++i)
    out.labels[i] = merge_labels(a.labels[i], b.labels[i]);
  return out;
}

/// Scores for downstream fusion: Occupied = 1, Empty = 0, Unknown = 0.5.
inline ScoreGrid scores_from_labels(const LabelGrid& grid) {
  ScoreGrid out(grid.spec);
  for (std::size_t i = 0; i < grid.labels.size(); ++i) {
    switch (grid.labels[i]) {
      case VoxelLabel::Occupied: out.scores[i] = 1.0f; break;
      case VoxelLabel::Empty: out.scores[i] = 0.0f; break;
      case VoxelLabel::Unknown: out.scores[i] = 0.5f; break;
    }
  }
  return out;
}

namespace detail {

/// Clips ray [0, inf) to the grid box. Returns false if it misses.
inline bool clip_to_grid(const GridSpec& spec, const Vec3& origin,
                         const Vec3& inv_dir, double& t0, double& t1) {
  t0 = 0.0;
  t1 = std::numeric_limits<double>::infinity();
  const Vec3 lo = spec.bounds_min();
  const Vec3 hi = spec.bounds_max();
  for (int a = 0; a < 3; ++a) {
    double ta = (lo[a] - origin[a]) * inv_dir[a];
    double tb = (hi[a] - origin[a]) * inv_dir[a];
    if (inv_dir[a] < 0.0) std::swap(ta, tb);
    if (std::isnan(ta) || std::isnan(tb)) continue;  // parallel on a face
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t1 <= t0) return false;
  }
  return true;
}

/// Walks one ray. `limit` is the distance to the surface sample (or max
/// range when there is none); `surface_is_object` says whether the cell
/// containing the sample gets Occupied (true) or Empty (false: masked-out
/// hit or range dropout).
inline void carve_ray(LabelGrid& grid, const Vec3& origin, const Vec3& dir,
                      double limit, bool surface_is_object) {
  const GridSpec& spec = grid.spec;
  const Vec3 inv = dir.cwiseInverse();
  double t0, t1;
  if (!clip_to_grid(spec, origin, inv, t0, t1)) return;
  if (t0 > limit) return;  // grid starts behind the surface

  const Vec3 entry = origin + t0 * dir;
  Vec3i cell = spec.cell_of(entry);
  for (int a = 0; a < 3; ++a)
    cell[a] = std::clamp(cell[a], 0, spec.resolution - 1);

  int step[3];
  double t_next[3];
  for (int a = 0; a < 3; ++a) {
    step[a] = dir[a] > 0.0 ? 1 : (dir[a] < 0.0 ? -1 : 0);
    if (step[a] == 0) {
      t_next[a] = std::numeric_limits<double>::infinity();
    } else {
      const int boundary = cell[a] + (step[a] > 0 ? 1 : 0);
      t_next[a] =
          (spec.origin[a] + boundary * spec.voxel_size - origin[a]) * inv[a];
    }
  }

  double t_enter = t0;
  while (true) {
    const int axis = t_next[0] <= t_next[1]
                         ? (t_next[0] <= t_next[2] ? 0 : 2)
                         : (t_next[1] <= t_next[2] ? 1 : 2);
    const double t_exit = t_next[axis];

    if (t_enter > limit) break;
    if (t_exit < limit) {
      grid.raise(spec.index(cell), VoxelLabel::Empty);
    } else {
      // This cell's interval contains the surface sample.
      grid.raise(spec.index(cell), surface_is_object ? VoxelLabel::Occupied
                                                     : VoxelLabel::Empty);
      break;
    }

    cell[axis] += step[axis];
    if (cell[axis] < 0 || cell[axis] >= spec.resolution) break;
    t_enter = t_exit;
    const int boundary = cell[axis] + (step[axis] > 0 ? 1 : 0);
    t_next[axis] =
        (spec.origin[axis] + boundary * spec.voxel_size - origin[axis]) *
        inv[axis];
  }
}

}  // namespace detail

/// Carves a depth image into `grid`. camera_to_grid maps camera-frame
/// geometry into the grid's frame (identity when the grid lives in this
/// camera's frame). `mask`, when non-null, flags which pixels' hits belong
/// to the object being reconstructed; others are treated as free space.
inline void carve_into(LabelGrid& grid, const DepthImage& image,
                       const RigidTransform& camera_to_grid,
                       const std::vector<std::uint8_t>* mask = nullptr) {
  const CameraModel& cam = image.camera;
  if (mask && mask->size() != image.depth.size())
    throw ValidationError("pixel mask size does not match depth image");
  const Vec3 origin = camera_to_grid.translation();
  for (int y = 0; y < cam.height; ++y) {
    for (int x = 0; x < cam.width; ++x) {
      const Vec3 dir = camera_to_grid.rotate(cam.pixel_dir(x, y));
      const float d = image.at(x, y);
      const std::size_t pixel = static_cast<std::size_t>(y) *
                                    static_cast<std::size_t>(cam.width) +
                                static_cast<std::size_t>(x);
      const bool valid = d > 0.0f;
      const bool is_object = valid && (!mask || (*mask)[pixel] != 0);
      const double limit = valid ? static_cast<double>(d) : cam.max_range;
      detail::carve_ray(grid, origin, dir, limit, is_object);
    }
  }
}

/// Single-view carve into a fresh grid in the camera's own frame.
inline LabelGrid ray_carve(const DepthImage& image, const GridSpec& spec,
                           const std::vector<std::uint8_t>* mask = nullptr) {
  LabelGrid grid(spec);
  carve_into(grid, image, RigidTransform::identity(), mask);
  return grid;
}

}  // namespace nbvox
