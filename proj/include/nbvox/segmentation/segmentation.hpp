#pragma once

// Tabletop segmentation: distance band filter, seeded RANSAC plane search
// constrained to near-horizontal planes, and extraction of the points above
// the recovered surface. All functions operate in a z-up frame whose origin
// sits on the sensor's vertical axis.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "nbvox/core/error.hpp"
#include "nbvox/core/geometry.hpp"
#include "nbvox/core/rng.hpp"

namespace nbvox {

/// Keeps points whose horizontal (xy) distance from the origin lies in
/// [near, far], both ends inclusive. Order is preserved.
inline PointCloud band_filter(const PointCloud& cloud, double near = 0.3,
                              double far = 0.7) {
  if (!(near >= 0.0) || !(far >= near))
    throw ValidationError("band filter requires 0 <= near <= far");
  PointCloud out;
  for (const Vec3& p : cloud.points) {
    const double r = std::hypot(p.x(), p.y());
    if (r >= near && r <= far) out.points.push_back(p);
  }
  return out;
}

struct RansacParams {
  int iterations = 1000;
  double distance_threshold = 0.005;   // meters
  double parallel_tolerance_deg = 10.0;  // max angle between normal and up
  Vec3 up_axis = Vec3::UnitZ();
  std::uint64_t seed = 0;
};

struct PlaneModel {
  Plane plane;                      // normal oriented toward up_axis
  std::vector<std::int32_t> inliers;  // indices into the input cloud
};

/// Seeded RANSAC for the supporting surface. Hypotheses come from 3 distinct
/// random points; ones whose normal strays more than parallel_tolerance_deg
/// from up_axis are discarded. The best hypothesis maximizes inlier count,
/// with ties going to the lower plane (smaller offset along up). The winner
/// is refined by a least-squares fit over its inliers; if the refit drifts
/// out of the angular tolerance the unrefined plane is kept. Inliers are
/// recomputed against the returned plane.
inline PlaneModel ransac_plane(const PointCloud& cloud,
                               const RansacParams& params = {}) {
  if (cloud.size() < 3)
    throw DegenerateInputError("plane search needs at least 3 points, got " +
                               std::to_string(cloud.size()));
  if (params.iterations < 1)
    throw ValidationError("plane search needs at least 1 iteration");
  const Vec3 up = params.up_axis.normalized();
  const double cos_tol =
      std::cos(params.parallel_tolerance_deg * std::numbers::pi / 180.0);

  Rng rng(params.seed);
  const std::int64_t n = static_cast<std::int64_t>(cloud.size());

  bool found = false;
  Plane best;
  std::size_t best_count = 0;

  auto count_inliers = [&](const Plane& plane) {
    std::size_t count = 0;
    for (const Vec3& p : cloud.points)
      if (std::abs(plane.signed_distance(p)) <= params.distance_threshold)
        ++count;
    return count;
  };

  for (int it = 0; it < params.iterations; ++it) {
    std::int64_t a = rng.uniform_int(0, n - 1);
    std::int64_t b = rng.uniform_int(0, n - 1);
    std::int64_t c = rng.uniform_int(0, n - 1);
    if (a == b || b == c || a == c) continue;
    Plane plane;
    try {
      plane = Plane::from_points(cloud.points[static_cast<std::size_t>(a)],
                                 cloud.points[static_cast<std::size_t>(b)],
                                 cloud.points[static_cast<std::size_t>(c)]);
    } catch (const DegenerateInputError&) {
      continue;
    }
    if (plane.normal.dot(up) < 0.0) {
      plane.normal = -plane.normal;
      plane.d = -plane.d;
    }
    if (plane.normal.dot(up) < cos_tol) continue;
    const std::size_t count = count_inliers(plane);
    if (!found || count > best_count ||
        (count == best_count && plane.d < best.d)) {
      best = plane;
      best_count = count;
      found = true;
    }
  }
  if (!found)
    throw NoPlaneError("no horizontal plane within " +
                       std::to_string(params.parallel_tolerance_deg) +
                       " deg of up after " +
                       std::to_string(params.iterations) + " iterations");

  // Least-squares polish over the consensus set.
  std::vector<Vec3> support;
  for (const Vec3& p : cloud.points)
    if (std::abs(best.signed_distance(p)) <= params.distance_threshold)
      support.push_back(p);
  if (support.size() >= 3) {
    Plane refined = Plane::fit(support);
    if (refined.normal.dot(up) < 0.0) {
      refined.normal = -refined.normal;
      refined.d = -refined.d;
    }
    if (refined.normal.dot(up) >= cos_tol) best = refined;
  }

  PlaneModel model;
  model.plane = best;
  for (std::size_t i = 0; i < cloud.size(); ++i)
    if (std::abs(best.signed_distance(cloud.points[i])) <=
        params.distance_threshold)
      model.inliers.push_back(static_cast<std::int32_t>(i));
  return model;
}

/// Points strictly more than margin above the plane (along its normal).
/// Order is preserved.
inline PointCloud extract_above_plane(const PointCloud& cloud,
                                      const Plane& plane,
                                      double margin = 0.005) {
  if (!(margin >= 0.0)) throw ValidationError("margin must be >= 0");
  PointCloud out;
  for (const Vec3& p : cloud.points)
    if (plane.signed_distance(p) > margin) out.points.push_back(p);
  return out;
}

}  // namespace nbvox
