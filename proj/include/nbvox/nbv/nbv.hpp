#pragma once

// Next-best-view selection. The uncertain voxels of a partially observed
// object form a cloud whose thinnest direction (smallest principal
// component) is the direction along which a new viewpoint collapses the
// most uncertainty per observed area: looking along it sweeps the slab of
// unknown cells edge-on. The chosen direction is signed away from the
// current camera so the commanded view comes from the far side, and is then
// turned into a base position, torso lift and head pitch for a mobile robot
// whose sensor rides a vertical axis above the base.

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "nbvox/core/error.hpp"
#include "nbvox/core/geometry.hpp"
#include "nbvox/core/json.hpp"
#include "nbvox/views/camera.hpp"
#include "nbvox/voxel/grid.hpp"

namespace nbvox {

struct PrincipalAxes {
  Vec3 mean = Vec3::Zero();
  Eigen::Matrix3d axes = Eigen::Matrix3d::Identity();  // columns, unit norm
  Vec3 eigenvalues = Vec3::Zero();  // descending, match axes columns
};

/// PCA of a point cloud: eigendecomposition of the mean-centered covariance
/// (population normalization, 1/n). Columns are sorted by descending
/// eigenvalue and sign-canonicalized: the largest-magnitude component of
/// each axis (lowest index on ties) is made positive.
inline PrincipalAxes principal_axes(const PointCloud& cloud) {
  if (cloud.size() < 3)
    throw DegenerateInputError("principal axes need at least 3 points, got " +
                               std::to_string(cloud.size()));
  const Vec3 mean = cloud_centroid(cloud);
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const Vec3& p : cloud.points) {
    const Vec3 q = p - mean;
    cov += q * q.transpose();
  }
  cov /= static_cast<double>(cloud.size());

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
  if (solver.info() != Eigen::Success)
    throw DegenerateInputError("eigendecomposition failed");

  PrincipalAxes out;
  out.mean = mean;
  for (int i = 0; i < 3; ++i) {
    const int src = 2 - i;  // Eigen sorts ascending
    out.eigenvalues[i] = std::max(0.0, solver.eigenvalues()[src]);
    Vec3 axis = solver.eigenvectors().col(src);
    int dominant = 0;
    axis.cwiseAbs().maxCoeff(&dominant);
    if (axis[dominant] < 0.0) axis = -axis;
    out.axes.col(i) = axis;
  }
  return out;
}

/// Unit direction minimizing the projected variance of the uncertain cell
/// centers, signed to point away from the current camera (non-negative dot
/// with the view direction). Near-tied smallest eigenvalues resolve to the
/// axis most orthogonal to the current view. Sets whose centers span less
/// than a plane (rank < 2) have no well-defined thin direction and are
/// rejected.
inline Vec3 next_best_view(const UncertainSet& uncertain,
                           const Vec3& current_view_dir) {
  const PrincipalAxes pca = principal_axes(uncertain.centers());
  const Vec3& ev = pca.eigenvalues;
  if (!(ev[0] > 0.0))
    throw DegenerateInputError("uncertain cells are coincident");
  if (ev[1] <= 1e-9 * ev[0])
    throw DegenerateInputError("uncertain cells are collinear");

  const Vec3 view = current_view_dir.normalized();
  constexpr double kTieTol = 1e-9;
  int pick = 2;
  double best_align = std::abs(pca.axes.col(2).dot(view));
  for (int j = 1; j >= 0; --j) {
    if (ev[j] - ev[2] > kTieTol * ev[0]) continue;
    const double align = std::abs(pca.axes.col(j).dot(view));
    if (align < best_align) {
      best_align = align;
      pick = j;
    }
  }

  Vec3 v = pca.axes.col(pick);
  const double toward = v.dot(view);
  if (std::abs(toward) > 1e-12 && toward < 0.0) v = -v;
  return v;
}

inline Vec3 next_best_view(const UncertainSet& uncertain,
                           const CameraModel& current_camera) {
  return next_best_view(uncertain, current_camera.view_dir());
}

struct RobotGeometry {
  double camera_base_height = 1.0;  // sensor height at zero torso lift
  double torso_min = 0.0;
  double torso_max = 0.4;

  void validate() const {
    if (!(camera_base_height > 0.0))
      throw ValidationError("camera base height must be positive");
    if (!(torso_max >= torso_min))
      throw ValidationError("torso range is inverted");
  }
};

struct NbvSolution {
  Vec3 v_nbv = Vec3::UnitZ();       // unit view-gain direction
  Vec3 target_position = Vec3::Zero();  // base goal, z = 0
  double theta_head = 0.0;  // head pitch, radians, positive looks up
  double h_torso = 0.0;     // torso lift within [torso_min, torso_max]
  double standoff = 0.6;    // commanded camera-to-centroid distance
  bool vertical_fallback = false;  // v_nbv too vertical for the base to reach

  /// World position of the sensor once the robot reaches the goal.
  Vec3 camera_position(const RobotGeometry& robot) const {
    return target_position +
           Vec3(0.0, 0.0, robot.camera_base_height + h_torso);
  }
};

/// Places the robot so its sensor sits at centroid + standoff * v_nbv and
/// looks back at the centroid. The torso absorbs the height demand (clamped
/// to its range); the head pitch re-aims at the centroid after clamping.
/// Near-vertical v_nbv cannot be reached by a ground robot, so the base
/// keeps the current bearing from the object, the torso goes to its extreme
/// toward the demanded side, and the head compensates.
inline NbvSolution target_pose(const Vec3& v_nbv, const Vec3& centroid,
                               const RobotGeometry& robot,
                               double d_optimal = 0.6,
                               const Vec3& current_camera_position =
                                   Vec3(1.0, 0.0, 0.0)) {
  robot.validate();
  if (!(d_optimal > 0.0))
    throw ValidationError("standoff distance must be positive");
  const double norm = v_nbv.norm();
  if (!(norm > 1e-9))
    throw ValidationError("view direction must be non-zero");
  const Vec3 v = v_nbv / norm;

  NbvSolution out;
  out.v_nbv = v;
  out.standoff = d_optimal;

  const double n_xy = std::hypot(v.x(), v.y());
  double torso_demand;
  double horizontal;
  if (n_xy >= 1e-6) {
    out.target_position =
        Vec3(centroid.x() + d_optimal * v.x(),
             centroid.y() + d_optimal * v.y(), 0.0);
    torso_demand =
        centroid.z() + d_optimal * v.z() - robot.camera_base_height;
    horizontal = d_optimal * n_xy;
  } else {
    out.vertical_fallback = true;
    Vec3 bearing = current_camera_position - centroid;
    bearing.z() = 0.0;
    const double blen = bearing.norm();
    const Vec3 u = blen > 1e-9 ? Vec3(bearing / blen) : Vec3::UnitX();
    out.target_position = Vec3(centroid.x() + d_optimal * u.x(),
                               centroid.y() + d_optimal * u.y(), 0.0);
    // Demand the range extreme directly so the clamp below returns it
    // exactly rather than a value perturbed by a height round trip.
    torso_demand = v.z() > 0.0 ? robot.torso_max : robot.torso_min;
    horizontal = d_optimal;
  }

  out.h_torso =
      std::clamp(torso_demand, robot.torso_min, robot.torso_max);
  const double camera_z = robot.camera_base_height + out.h_torso;
  out.theta_head = std::atan2(centroid.z() - camera_z, horizontal);
  return out;
}

inline Json to_json(const NbvSolution& s) {
  Json j;
  j["v_nbv"] = to_json(s.v_nbv);
  j["target_position"] = to_json(s.target_position);
  j["theta_head_rad"] = s.theta_head;
  j["h_torso"] = s.h_torso;
  j["standoff"] = s.standoff;
  j["vertical_fallback"] = s.vertical_fallback;
  return j;
}

inline NbvSolution solution_from_json(const Json& j, const std::string& what) {
  NbvSolution s;
  try {
    s.v_nbv = vec3_from_json(j.at("v_nbv"), what + ".v_nbv");
    s.target_position =
        vec3_from_json(j.at("target_position"), what + ".target_position");
    s.theta_head = j.at("theta_head_rad").get<double>();
    s.h_torso = j.at("h_torso").get<double>();
    s.standoff = j.at("standoff").get<double>();
    s.vertical_fallback = j.at("vertical_fallback").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(what + ": " + e.what());
  }
  return s;
}

}  // namespace nbvox
