#pragma once

// Axis-aligned cubical voxel grids. Cells are addressed by integer (x, y, z)
// and stored linearly in y-fastest order (index = x*N*N + z*N + y), the same
// layout the grid file format uses, so serialization never reshuffles.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nbvox/core/error.hpp"
#include "nbvox/core/geometry.hpp"

namespace nbvox {

using Vec3i = Eigen::Vector3i;

struct GridSpec {
  int resolution = 40;       // cells per axis
  Vec3 origin = Vec3::Zero();  // world position of the (0,0,0) cell corner
  double voxel_size = 0.0;   // edge length of one cell, meters

  std::size_t cell_count() const {
    const std::size_t n = static_cast<std::size_t>(resolution);
    return n * n * n;
  }

  std::size_t index(int x, int y, int z) const {
    const std::size_t n = static_cast<std::size_t>(resolution);
    return static_cast<std::size_t>(x) * n * n +
           static_cast<std::size_t>(z) * n + static_cast<std::size_t>(y);
  }

  std::size_t index(const Vec3i& c) const { return index(c.x(), c.y(), c.z()); }

  bool in_bounds(const Vec3i& c) const {
    return c.x() >= 0 && c.y() >= 0 && c.z() >= 0 && c.x() < resolution &&
           c.y() < resolution && c.z() < resolution;
  }

  Vec3 cell_center(const Vec3i& c) const {
    return origin + voxel_size * (c.cast<double>() + Vec3::Constant(0.5));
  }

  /// Integer cell containing p. May be out of bounds; callers check.
  Vec3i cell_of(const Vec3& p) const {
    const Vec3 local = (p - origin) / voxel_size;
    return Vec3i(static_cast<int>(std::floor(local.x())),
                 static_cast<int>(std::floor(local.y())),
                 static_cast<int>(std::floor(local.z())));
  }

  double side_length() const { return resolution * voxel_size; }
  Vec3 bounds_min() const { return origin; }
  Vec3 bounds_max() const { return origin + Vec3::Constant(side_length()); }

  bool operator==(const GridSpec& other) const {
    return resolution == other.resolution && origin == other.origin &&
           voxel_size == other.voxel_size;
  }

  void validate() const {
    if (resolution < 1)
      throw ValidationError("grid resolution must be >= 1, got " +
                            std::to_string(resolution));
    if (!(voxel_size > 0.0) || !std::isfinite(voxel_size))
      throw ValidationError("voxel size must be positive and finite");
    if (!origin.allFinite())
      throw ValidationError("grid origin must be finite");
  }
};

struct BinaryGrid {
  GridSpec spec;
  std::vector<std::uint8_t> occupied;  // 0 or 1 per cell

  BinaryGrid() = default;
  explicit BinaryGrid(const GridSpec& s) : spec(s), occupied(s.cell_count(), 0) {
    spec.validate();
  }

  bool get(const Vec3i& c) const { return occupied[spec.index(c)] != 0; }
  void set(const Vec3i& c, bool value) {
    occupied[spec.index(c)] = value ? 1 : 0;
  }

  std::size_t count() const {
    std::size_t n = 0;
    for (std::uint8_t v : occupied) n += v;
    return n;
  }
};

/// Per-cell occupancy scores in [0, 1]. 1 = observed surface, 0 = observed
/// free space, 0.5 = never observed. Stored as float32, which is also the
/// on-disk precision, so save/load round-trips bit-exactly.
struct ScoreGrid {
  GridSpec spec;
  std::vector<float> scores;

  ScoreGrid() = default;
  explicit ScoreGrid(const GridSpec& s, float fill = 0.5f)
      : spec(s), scores(s.cell_count(), fill) {
    spec.validate();
  }

  float get(const Vec3i& c) const { return scores[spec.index(c)]; }
  void set(const Vec3i& c, float value) { scores[spec.index(c)] = value; }
};

/// Cells of a score grid whose score is within epsilon of the decision
/// boundary, i.e. cells the sensor fusion has no opinion about.
struct UncertainSet {
  GridSpec spec;
  std::vector<Vec3i> cells;

  PointCloud centers() const {
    PointCloud out;
    out.points.reserve(cells.size());
    for (const Vec3i& c : cells) out.points.push_back(spec.cell_center(c));
    return out;
  }
};

/// Occupancy decision: score >= v_boundary counts as occupied, so a cell
/// sitting exactly on the boundary (including never-observed 0.5 cells at
/// the default boundary) is kept. The thresholded hull of a carved grid is
/// therefore the visual hull of the observed views.
inline BinaryGrid threshold_grid(const ScoreGrid& grid,
                                 double v_boundary = 0.5) {
  BinaryGrid out(grid.spec);
  for (std::size_t i = 0; i < grid.scores.size(); ++i)
    out.occupied[i] = static_cast<double>(grid.scores[i]) >= v_boundary;
  return out;
}

/// Cells with |score - v_boundary| <= epsilon, both bounds inclusive.
/// Traversal order is x, then z, then y fastest (storage order), so the
/// result is deterministic.
inline UncertainSet uncertain_voxels(const ScoreGrid& grid,
                                     double epsilon = 0.025,
                                     double v_boundary = 0.5) {
  if (!(epsilon >= 0.0))
    throw ValidationError("uncertainty band epsilon must be >= 0");
  UncertainSet out;
  out.spec = grid.spec;
  const int n = grid.spec.resolution;
  for (int x = 0; x < n; ++x)
    for (int z = 0; z < n; ++z)
      for (int y = 0; y < n; ++y) {
        const Vec3i c(x, y, z);
        const double s = grid.get(c);
        if (std::abs(s - v_boundary) <= epsilon) out.cells.push_back(c);
      }
  return out;
}

/// Cubical grid spec covering the cloud: the tight bounding cube around the
/// points, grown by pad_fraction of the side on every face. Clouds with zero
/// spatial extent are rejected.
inline GridSpec fit_spec(const PointCloud& cloud, int resolution,
                         double pad_fraction = 0.05) {
  if (cloud.empty())
    throw DegenerateInputError("cannot fit a grid to an empty cloud");
  if (resolution < 1)
    throw ValidationError("grid resolution must be >= 1");
  if (!(pad_fraction >= 0.0))
    throw ValidationError("pad fraction must be >= 0");
  const Aabb box = cloud_bounds(cloud);
  const double tight = box.extent().maxCoeff();
  if (!(tight > 0.0))
    throw DegenerateInputError("cloud has zero spatial extent");
  const double side = tight * (1.0 + 2.0 * pad_fraction);
  GridSpec spec;
  spec.resolution = resolution;
  spec.voxel_size = side / resolution;
  spec.origin = box.center() - Vec3::Constant(0.5 * side);
  return spec;
}

/// Marks the cell containing each point. Points outside the grid bounds are
/// ignored (a point exactly on the max face lands outside).
inline BinaryGrid voxelize_cloud(const PointCloud& cloud,
                                 const GridSpec& spec) {
  BinaryGrid out(spec);
  for (const Vec3& p : cloud.points) {
    const Vec3i c = spec.cell_of(p);
    if (spec.in_bounds(c)) out.occupied[spec.index(c)] = 1;
  }
  return out;
}

}  // namespace nbvox
