#pragma once

// Value types shared across the pipeline: point clouds, triangle meshes,
// rigid transforms and planes. Double precision throughout; quaternions are
// right-handed and stored scalar-last (x, y, z, w), matching Eigen's
// coefficient order and the on-disk JSON layout.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "nbvox/core/error.hpp"

namespace nbvox {

using Vec3 = Eigen::Vector3d;
using Quat = Eigen::Quaterniond;

struct Aabb {
  Vec3 min = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 max = Vec3::Constant(-std::numeric_limits<double>::infinity());

  bool empty() const { return (min.array() > max.array()).any(); }

  void expand(const Vec3& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }

  void expand(const Aabb& other) {
    min = min.cwiseMin(other.min);
    max = max.cwiseMax(other.max);
  }

  Vec3 extent() const { return max - min; }
  Vec3 center() const { return 0.5 * (min + max); }
};

/// Rigid body transform q * p + t. The quaternion is kept unit-norm; the
/// constructor normalizes and rejects near-zero input.
class RigidTransform {
 public:
  RigidTransform() : q_(Quat::Identity()), t_(Vec3::Zero()) {}

  RigidTransform(const Quat& rotation, const Vec3& translation)
      : q_(rotation), t_(translation) {
    const double n = q_.norm();
    if (!(n > 1e-12) || !std::isfinite(n))
      throw ValidationError("rigid transform: quaternion norm is " +
                            std::to_string(n));
    q_.coeffs() /= n;
  }

  static RigidTransform identity() { return RigidTransform(); }

  static RigidTransform translation(const Vec3& t) {
    return RigidTransform(Quat::Identity(), t);
  }

  static RigidTransform from_axis_angle(const Vec3& axis, double angle_rad,
                                        const Vec3& t = Vec3::Zero()) {
    return RigidTransform(Quat(Eigen::AngleAxisd(angle_rad, axis.normalized())),
                          t);
  }

  const Quat& rotation() const { return q_; }
  const Vec3& translation() const { return t_; }

  Vec3 apply(const Vec3& p) const { return q_ * p + t_; }

  /// Rotation only; use for directions.
  Vec3 rotate(const Vec3& v) const { return q_ * v; }

  RigidTransform inverse() const {
    const Quat qi = q_.conjugate();
    return RigidTransform(qi, qi * (-t_));
  }

  /// Composition: (*this) after other, i.e. apply(other.apply(p)).
  RigidTransform operator*(const RigidTransform& other) const {
    return RigidTransform(q_ * other.q_, q_ * other.t_ + t_);
  }

  bool approx_equal(const RigidTransform& other, double tol = 1e-9) const {
    const double dq = std::min((q_.coeffs() - other.q_.coeffs()).norm(),
                               (q_.coeffs() + other.q_.coeffs()).norm());
    return dq <= tol && (t_ - other.t_).norm() <= tol;
  }

 private:
  Quat q_;
  Vec3 t_;
};

/// Unordered set of 3D points. Coordinates are expected finite; loaders
/// enforce this, in-memory producers are trusted.
struct PointCloud {
  std::vector<Vec3> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

inline PointCloud transform_cloud(const PointCloud& cloud,
                                  const RigidTransform& tf) {
  PointCloud out;
  out.points.reserve(cloud.points.size());
  for (const Vec3& p : cloud.points) out.points.push_back(tf.apply(p));
  return out;
}

inline Aabb cloud_bounds(const PointCloud& cloud) {
  Aabb box;
  for (const Vec3& p : cloud.points) box.expand(p);
  return box;
}

inline Vec3 cloud_centroid(const PointCloud& cloud) {
  if (cloud.empty())
    throw DegenerateInputError("centroid of an empty point cloud");
  Vec3 sum = Vec3::Zero();
  for (const Vec3& p : cloud.points) sum += p;
  return sum / static_cast<double>(cloud.size());
}

/// Plane as unit normal + signed offset: n . p = d for points on the plane.
struct Plane {
  Vec3 normal = Vec3::UnitZ();
  double d = 0.0;

  double signed_distance(const Vec3& p) const { return normal.dot(p) - d; }

  static Plane from_points(const Vec3& a, const Vec3& b, const Vec3& c) {
    const Vec3 n = (b - a).cross(c - a);
    const double len = n.norm();
    if (!(len > 1e-15))
      throw DegenerateInputError("plane from collinear points");
    Plane out;
    out.normal = n / len;
    out.d = out.normal.dot(a);
    return out;
  }

  /// Least-squares fit through the centroid. Requires >= 3 points.
  static Plane fit(const std::vector<Vec3>& pts) {
    if (pts.size() < 3)
      throw DegenerateInputError("plane fit needs at least 3 points");
    Vec3 mean = Vec3::Zero();
    for (const Vec3& p : pts) mean += p;
    mean /= static_cast<double>(pts.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const Vec3& p : pts) {
      const Vec3 q = p - mean;
      cov += q * q.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
    const Vec3 n = es.eigenvectors().col(0);  // smallest eigenvalue
    const double len = n.norm();
    if (!(len > 1e-15)) throw DegenerateInputError("plane fit degenerate");
    Plane out;
    out.normal = n / len;
    out.d = out.normal.dot(mean);
    return out;
  }
};

/// Indexed triangle mesh. Faces hold vertex indices in counter-clockwise
/// order when viewed from outside.
struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::int32_t, 3>> faces;

  bool empty() const { return faces.empty(); }

  Vec3 face_vertex(std::size_t face, int corner) const {
    return vertices[static_cast<std::size_t>(faces[face][corner])];
  }

  double face_area(std::size_t face) const {
    const Vec3 a = face_vertex(face, 0);
    return 0.5 * (face_vertex(face, 1) - a).cross(face_vertex(face, 2) - a)
                     .norm();
  }

  double total_area() const {
    double sum = 0.0;
    for (std::size_t f = 0; f < faces.size(); ++f) sum += face_area(f);
    return sum;
  }
};

inline Aabb mesh_bounds(const TriangleMesh& mesh) {
  Aabb box;
  for (const Vec3& v : mesh.vertices) box.expand(v);
  return box;
}

inline Vec3 mesh_vertex_centroid(const TriangleMesh& mesh) {
  if (mesh.vertices.empty())
    throw DegenerateInputError("centroid of a mesh with no vertices");
  Vec3 sum = Vec3::Zero();
  for (const Vec3& v : mesh.vertices) sum += v;
  return sum / static_cast<double>(mesh.vertices.size());
}

inline TriangleMesh transform_mesh(const TriangleMesh& mesh,
                                   const RigidTransform& tf) {
  TriangleMesh out;
  out.vertices.reserve(mesh.vertices.size());
  for (const Vec3& v : mesh.vertices) out.vertices.push_back(tf.apply(v));
  out.faces = mesh.faces;
  return out;
}

inline TriangleMesh merge_meshes(const TriangleMesh& a, const TriangleMesh& b) {
  TriangleMesh out = a;
  const std::int32_t base = static_cast<std::int32_t>(a.vertices.size());
  out.vertices.insert(out.vertices.end(), b.vertices.begin(),
                      b.vertices.end());
  out.faces.reserve(a.faces.size() + b.faces.size());
  for (const auto& f : b.faces)
    out.faces.push_back({f[0] + base, f[1] + base, f[2] + base});
  return out;
}

/// Uniform scale about the origin so the smallest axis-aligned bounding box
/// extent equals grip_width. Idempotent. Meshes whose smallest extent is
/// (near) zero are rejected rather than blown up.
inline TriangleMesh scale_to_grip_width(const TriangleMesh& mesh,
                                        double grip_width) {
  if (!(grip_width > 0.0))
    throw ValidationError("grip width must be positive");
  if (mesh.vertices.empty())
    throw DegenerateInputError("cannot scale an empty mesh");
  const Vec3 extent = mesh_bounds(mesh).extent();
  const double smallest = extent.minCoeff();
  if (!(smallest > 1e-12))
    throw DegenerateInputError("mesh is flat along one axis; refusing scale");
  const double s = grip_width / smallest;
  TriangleMesh out = mesh;
  for (Vec3& v : out.vertices) v *= s;
  return out;
}

}  // namespace nbvox
