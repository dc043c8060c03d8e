#pragma once

// Bounding volume hierarchy over mesh triangles. Median split on the longest
// centroid axis; leaves hold small triangle ranges. Supports nearest-hit and
// all-hits ray queries (Moller-Trumbore, double precision, no backface
// culling) and closest-point-on-surface queries with best-first pruning.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "nbvox/core/error.hpp"
#include "nbvox/core/geometry.hpp"

namespace nbvox {

struct RayHit {
  double t = std::numeric_limits<double>::infinity();
  std::int32_t triangle = -1;
  Vec3 point = Vec3::Zero();
};

struct SurfacePoint {
  Vec3 point = Vec3::Zero();
  double distance = std::numeric_limits<double>::infinity();
  std::int32_t triangle = -1;
};

/// Ray/triangle intersection. Returns the parameter t >= 0 along dir, or
/// nothing. dir need not be unit length; t is measured in units of |dir|.
inline std::optional<double> intersect_triangle(const Vec3& origin,
                                                const Vec3& dir, const Vec3& a,
                                                const Vec3& b, const Vec3& c) {
  constexpr double kEps = 1e-13;
  const Vec3 e1 = b - a;
  const Vec3 e2 = c - a;
  const Vec3 pvec = dir.cross(e2);
  const double det = e1.dot(pvec);
  if (std::abs(det) < kEps) return std::nullopt;  // parallel or degenerate
  const double inv_det = 1.0 / det;
  const Vec3 tvec = origin - a;
  const double u = tvec.dot(pvec) * inv_det;
  if (u < -kEps || u > 1.0 + kEps) return std::nullopt;
  const Vec3 qvec = tvec.cross(e1);
  const double v = dir.dot(qvec) * inv_det;
  if (v < -kEps || u + v > 1.0 + kEps) return std::nullopt;
  const double t = e2.dot(qvec) * inv_det;
  if (t < 0.0) return std::nullopt;
  return t;
}

/// Closest point on triangle abc to p (Ericson, Real-Time Collision
/// Detection 5.1.5).
inline Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a,
                                      const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + (d1 / (d1 - d3)) * ab;

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + (d2 / (d2 - d6)) * ac;

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && d4 - d3 >= 0.0 && d5 - d6 >= 0.0)
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);

  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

class Bvh {
 public:
  explicit Bvh(const TriangleMesh& mesh) : mesh_(&mesh) {
    const std::size_t n = mesh.faces.size();
    if (n == 0) throw DegenerateInputError("BVH over a mesh with no faces");
    order_.resize(n);
    boxes_.resize(n);
    centroids_.resize(n);
    for (std::size_t f = 0; f < n; ++f) {
      order_[f] = static_cast<std::int32_t>(f);
      Aabb box;
      box.expand(mesh.face_vertex(f, 0));
      box.expand(mesh.face_vertex(f, 1));
      box.expand(mesh.face_vertex(f, 2));
      boxes_[f] = box;
      centroids_[f] = box.center();
    }
    nodes_.reserve(2 * n);
    build(0, n);
    boxes_.clear();
    centroids_.clear();
  }

  const TriangleMesh& mesh() const { return *mesh_; }

  /// Nearest intersection with t in (t_min, t_max], if any.
  std::optional<RayHit> nearest_hit(
      const Vec3& origin, const Vec3& dir, double t_min = 0.0,
      double t_max = std::numeric_limits<double>::infinity()) const {
    RayHit best;
    best.t = t_max;
    bool found = false;
    const Vec3 inv = dir.cwiseInverse();
    std::vector<std::int32_t> stack{0};
    while (!stack.empty()) {
      const std::int32_t id = stack.back();
      stack.pop_back();
      const Node& node = nodes_[static_cast<std::size_t>(id)];
      if (!box_hit(node.box, origin, inv, t_min, best.t)) continue;
      if (node.count > 0) {
        for (std::int32_t i = 0; i < node.count; ++i) {
          const std::int32_t f =
              order_[static_cast<std::size_t>(node.link + i)];
          const auto t = intersect_tri(f, origin, dir);
          if (t && *t > t_min && *t <= best.t) {
            best.t = *t;
            best.triangle = f;
            found = true;
          }
        }
      } else {
        stack.push_back(id + 1);     // left child follows in DFS order
        stack.push_back(node.link);  // right child
      }
    }
    if (!found) return std::nullopt;
    best.point = origin + best.t * dir;
    return best;
  }

  /// Calls fn(t, triangle) for every intersection with t in (t_min, t_max].
  /// Order is unspecified.
  void for_each_hit(const Vec3& origin, const Vec3& dir, double t_min,
                    double t_max,
                    const std::function<void(double, std::int32_t)>& fn) const {
    const Vec3 inv = dir.cwiseInverse();
    std::vector<std::int32_t> stack{0};
    while (!stack.empty()) {
      const std::int32_t id = stack.back();
      stack.pop_back();
      const Node& node = nodes_[static_cast<std::size_t>(id)];
      if (!box_hit(node.box, origin, inv, t_min, t_max)) continue;
      if (node.count > 0) {
        for (std::int32_t i = 0; i < node.count; ++i) {
          const std::int32_t f =
              order_[static_cast<std::size_t>(node.link + i)];
          const auto t = intersect_tri(f, origin, dir);
          if (t && *t > t_min && *t <= t_max) fn(*t, f);
        }
      } else {
        stack.push_back(id + 1);
        stack.push_back(node.link);
      }
    }
  }

  /// Closest point on the surface to query.
  SurfacePoint closest_point(const Vec3& query) const {
    SurfacePoint best;
    struct Entry {
      double lower;  // lower bound on distance to anything in the node
      std::int32_t node;
    };
    std::vector<Entry> stack{{0.0, 0}};
    while (!stack.empty()) {
      const Entry e = stack.back();
      stack.pop_back();
      if (e.lower >= best.distance) continue;
      const Node& node = nodes_[static_cast<std::size_t>(e.node)];
      if (node.count > 0) {
        for (std::int32_t i = 0; i < node.count; ++i) {
          const std::int32_t f =
              order_[static_cast<std::size_t>(node.link + i)];
          const std::size_t face = static_cast<std::size_t>(f);
          const Vec3 q = closest_point_on_triangle(
              query, mesh_->face_vertex(face, 0), mesh_->face_vertex(face, 1),
              mesh_->face_vertex(face, 2));
          const double d = (q - query).norm();
          if (d < best.distance) {
            best.distance = d;
            best.point = q;
            best.triangle = f;
          }
        }
      } else {
        Entry children[2] = {
            {box_distance(nodes_[static_cast<std::size_t>(e.node + 1)].box,
                          query),
             e.node + 1},
            {box_distance(nodes_[static_cast<std::size_t>(node.link)].box,
                          query),
             node.link}};
        // Push the farther child first so the nearer is explored next.
        if (children[0].lower < children[1].lower)
          std::swap(children[0], children[1]);
        for (const Entry& c : children)
          if (c.lower < best.distance) stack.push_back(c);
      }
    }
    return best;
  }

 private:
  struct Node {
    Aabb box;
    std::int32_t link = 0;  // leaf: offset into order_; inner: right child id
    std::int32_t count = 0;  // leaf: triangle count; inner: 0
  };

  static constexpr std::size_t kLeafSize = 4;

  std::int32_t build(std::size_t begin, std::size_t end) {
    const std::int32_t id = static_cast<std::int32_t>(nodes_.size());
    nodes_.emplace_back();
    Aabb box;
    for (std::size_t i = begin; i < end; ++i)
      box.expand(boxes_[static_cast<std::size_t>(order_[i])]);
    nodes_[static_cast<std::size_t>(id)].box = box;

    if (end - begin <= kLeafSize) {
      nodes_[static_cast<std::size_t>(id)].link =
          static_cast<std::int32_t>(begin);
      nodes_[static_cast<std::size_t>(id)].count =
          static_cast<std::int32_t>(end - begin);
      return id;
    }

    Aabb cbox;
    for (std::size_t i = begin; i < end; ++i)
      cbox.expand(centroids_[static_cast<std::size_t>(order_[i])]);
    int axis = 0;
    cbox.extent().maxCoeff(&axis);
    const std::size_t mid = (begin + end) / 2;
    std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                     order_.begin() + static_cast<std::ptrdiff_t>(mid),
                     order_.begin() + static_cast<std::ptrdiff_t>(end),
                     [&](std::int32_t a, std::int32_t b) {
                       return centroids_[static_cast<std::size_t>(a)][axis] <
                              centroids_[static_cast<std::size_t>(b)][axis];
                     });
    build(begin, mid);  // left child lands at id + 1
    const std::int32_t right = build(mid, end);
    nodes_[static_cast<std::size_t>(id)].link = right;
    nodes_[static_cast<std::size_t>(id)].count = 0;
    return id;
  }

  std::optional<double> intersect_tri(std::int32_t f, const Vec3& origin,
                                      const Vec3& dir) const {
    const std::size_t face = static_cast<std::size_t>(f);
    return intersect_triangle(origin, dir, mesh_->face_vertex(face, 0),
                              mesh_->face_vertex(face, 1),
                              mesh_->face_vertex(face, 2));
  }

  static bool box_hit(const Aabb& box, const Vec3& origin, const Vec3& inv_dir,
                      double t_min, double t_max) {
    for (int a = 0; a < 3; ++a) {
      double t0 = (box.min[a] - origin[a]) * inv_dir[a];
      double t1 = (box.max[a] - origin[a]) * inv_dir[a];
      if (inv_dir[a] < 0.0) std::swap(t0, t1);
      if (std::isnan(t0) || std::isnan(t1)) continue;  // parallel, origin on face
      t_min = std::max(t_min, t0);
      t_max = std::min(t_max, t1);
      if (t_max < t_min) return false;
    }
    return true;
  }

  static double box_distance(const Aabb& box, const Vec3& p) {
    const Vec3 clamped = p.cwiseMax(box.min).cwiseMin(box.max);
    return (p - clamped).norm();
  }

  const TriangleMesh* mesh_;
  std::vector<Node> nodes_;
  std::vector<std::int32_t> order_;
  std::vector<Aabb> boxes_;
  std::vector<Vec3> centroids_;
};

}  // namespace nbvox
