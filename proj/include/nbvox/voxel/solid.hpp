#pragma once

// Solid (filled-interior) voxelization of a watertight mesh by parity ray
// casting: one ray per (x, z) column through the cell centers, counting
// surface crossings along +y. Cells behind an odd number of crossings are
// inside. Requires a closed, self-intersection-free surface; unions of
// overlapping closed meshes will misclassify their overlap.

#include <algorithm>
#include <cmath>
#include <vector>

#include "nbvox/core/bvh.hpp"
#include "nbvox/core/geometry.hpp"
#include "nbvox/voxel/grid.hpp"

namespace nbvox {

namespace detail {

/// Sorted crossing parameters of the ray, with near-duplicates (shared
/// triangle edges hit twice) collapsed.
inline std::vector<double> ray_crossings(const Bvh& bvh, const Vec3& origin,
                                         const Vec3& dir, double t_max,
                                         double weld_eps) {
  std::vector<double> ts;
  bvh.for_each_hit(origin, dir, 0.0, t_max,
                   [&](double t, std::int32_t) { ts.push_back(t); });
  std::sort(ts.begin(), ts.end());
  std::vector<double> out;
  for (double t : ts) {
    if (!out.empty() && t - out.back() <= weld_eps) continue;
    out.push_back(t);
  }
  return out;
}

}  // namespace detail

/// Point-in-mesh test by crossing parity along +y.
inline bool inside_mesh(const Bvh& bvh, const Vec3& p) {
  const Aabb box = mesh_bounds(bvh.mesh());
  if (box.empty()) return false;
  const double reach = (box.max.y() - p.y()) + box.extent().norm();
  const double weld = 1e-9 * std::max(1.0, box.extent().norm());
  const auto ts =
      detail::ray_crossings(bvh, p, Vec3::UnitY(), reach, weld);
  return ts.size() % 2 == 1;
}

inline BinaryGrid solid_voxelize(const Bvh& bvh, const GridSpec& spec) {
  spec.validate();
  BinaryGrid grid(spec);
  const int n = spec.resolution;
  const double weld =
      1e-9 * std::max(1.0, mesh_bounds(bvh.mesh()).extent().norm());
  const double reach = spec.side_length() + spec.voxel_size;
  for (int x = 0; x < n; ++x) {
    for (int z = 0; z < n; ++z) {
      // Ray starts half a cell below the grid so every center is ahead of it.
      const Vec3 start =
          spec.cell_center(Vec3i(x, 0, z)) - Vec3(0.0, spec.voxel_size, 0.0);
      const auto ts =
          detail::ray_crossings(bvh, start, Vec3::UnitY(), reach, weld);
      std::size_t next = 0;
      bool inside = false;
      for (int y = 0; y < n; ++y) {
        // Cell center at t = voxel_size * (y + 1) along the ray.
        const double tc = spec.voxel_size * (y + 1);
        while (next < ts.size() && ts[next] < tc) {
          inside = !inside;
          ++next;
        }
        if (inside) grid.occupied[spec.index(x, y, z)] = 1;
      }
    }
  }
  return grid;
}

inline BinaryGrid solid_voxelize(const TriangleMesh& mesh,
                                 const GridSpec& spec) {
  const Bvh bvh(mesh);
  return solid_voxelize(bvh, spec);
}

}  // namespace nbvox
