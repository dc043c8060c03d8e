#pragma once

// Isosurface extraction from score grids. Samples live at voxel centers;
// "inside" means score >= iso. Samples outside the grid read as 0, which is
// below any valid iso, so every extracted surface is closed: occupancy
// reaching the grid border is capped half a cell outside the outermost
// centers.
//
// The 256-entry case table is derived at first use instead of transcribed:
// for each corner configuration the cut edges are paired into segments per
// cube face (on ambiguous faces, the two segments isolate the inside
// corners), segments chain into loops, and each loop is oriented so its
// normal points away from the inside corners it cuts off. The face rule
// depends only on the face's corner states, which both cubes sharing the
// face see identically, so adjacent cubes always produce matching boundary
// segments and the global mesh is watertight by construction.

#include <algorithm>
#include <array>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "nbvox/core/error.hpp"
#include "nbvox/core/geometry.hpp"
#include "nbvox/voxel/grid.hpp"

namespace nbvox {

namespace mc_detail {

struct EdgeDef {
  int c0;    // corner with bit `axis` clear
  int c1;    // c0 | (1 << axis)
  int axis;
};

inline Vec3 corner_pos(int c) {
  return Vec3(c & 1, (c >> 1) & 1, (c >> 2) & 1);
}

inline const std::array<EdgeDef, 12>& edge_defs() {
  static const std::array<EdgeDef, 12> defs = [] {
    std::array<EdgeDef, 12> out{};
    int id = 0;
    for (int axis = 0; axis < 3; ++axis)
      for (int c = 0; c < 8; ++c)
        if (((c >> axis) & 1) == 0) out[id++] = {c, c | (1 << axis), axis};
    return out;
  }();
  return defs;
}

using Triangle = std::array<std::int8_t, 3>;
using CaseTable = std::array<std::vector<Triangle>, 256>;

inline CaseTable derive_case_table() {
  const auto& edges = edge_defs();

  // Face (axis, side) owns the 4 corners with bit `axis` == side and the 4
  // edges connecting them.
  struct Face {
    std::vector<int> corners;
    std::vector<int> edges;
  };
  std::array<Face, 6> faces;
  for (int axis = 0; axis < 3; ++axis) {
    for (int side = 0; side < 2; ++side) {
      Face& face = faces[static_cast<std::size_t>(axis * 2 + side)];
      for (int c = 0; c < 8; ++c)
        if (((c >> axis) & 1) == side) face.corners.push_back(c);
      for (int e = 0; e < 12; ++e) {
        const bool has0 = ((edges[static_cast<std::size_t>(e)].c0 >> axis) &
                           1) == side;
        const bool has1 = ((edges[static_cast<std::size_t>(e)].c1 >> axis) &
                           1) == side;
        if (has0 && has1) face.edges.push_back(e);
      }
    }
  }

  CaseTable table;
  for (int config = 0; config < 256; ++config) {
    const auto inside = [&](int c) { return (config >> c) & 1; };

    std::array<bool, 12> cut{};
    for (int e = 0; e < 12; ++e)
      cut[static_cast<std::size_t>(e)] =
          inside(edges[static_cast<std::size_t>(e)].c0) !=
          inside(edges[static_cast<std::size_t>(e)].c1);

    // Segment adjacency: each cut edge pairs with exactly one other cut
    // edge on each of its two faces.
    std::array<std::vector<int>, 12> next;
    auto connect = [&](int a, int b) {
      next[static_cast<std::size_t>(a)].push_back(b);
      next[static_cast<std::size_t>(b)].push_back(a);
    };
    for (const Face& face : faces) {
      std::vector<int> fcut;
      for (int e : face.edges) if (cut[static_cast<std::size_t>(e)])
        fcut.push_back(e);
      if (fcut.empty()) continue;
      if (fcut.size() == 2) {
        connect(fcut[0], fcut[1]);
      } else if (fcut.size() == 4) {
        // Ambiguous face: two inside corners sit diagonally. Pair each
        // inside corner's two incident edges, isolating the corners.
        for (int c : face.corners) {
          if (!inside(c)) continue;
          std::vector<int> incident;
          for (int e : fcut) {
            if (edges[static_cast<std::size_t>(e)].c0 == c ||
                edges[static_cast<std::size_t>(e)].c1 == c)
              incident.push_back(e);
          }
          if (incident.size() != 2)
            throw std::logic_error("case table: ambiguous face pairing");
          connect(incident[0], incident[1]);
        }
      } else {
        throw std::logic_error("case table: face with odd cut count");
      }
    }

    for (int e = 0; e < 12; ++e)
      if (cut[static_cast<std::size_t>(e)] &&
          next[static_cast<std::size_t>(e)].size() != 2)
        throw std::logic_error("case table: cut edge degree != 2");

    // Chain segments into closed loops.
    std::array<bool, 12> used{};
    std::vector<std::vector<int>> loops;
    for (int start = 0; start < 12; ++start) {
      if (!cut[static_cast<std::size_t>(start)] ||
          used[static_cast<std::size_t>(start)])
        continue;
      std::vector<int> loop{start};
      used[static_cast<std::size_t>(start)] = true;
      int prev = -1, cur = start;
      while (true) {
        const auto& nb = next[static_cast<std::size_t>(cur)];
        const int nxt = nb[0] == prev ? nb[1] : nb[0];
        if (nxt == start) break;
        loop.push_back(nxt);
        used[static_cast<std::size_t>(nxt)] = true;
        prev = cur;
        cur = nxt;
      }
      if (loop.size() < 3)
        throw std::logic_error("case table: loop shorter than 3");
      loops.push_back(std::move(loop));
    }

    // Orient each loop so its normal points away from the inside corners it
    // isolates, then fan-triangulate.
    for (auto& loop : loops) {
      std::vector<Vec3> pts;
      pts.reserve(loop.size());
      for (int e : loop)
        pts.push_back(0.5 *
                      (corner_pos(edges[static_cast<std::size_t>(e)].c0) +
                       corner_pos(edges[static_cast<std::size_t>(e)].c1)));
      Vec3 normal = Vec3::Zero();
      Vec3 centroid = Vec3::Zero();
      for (std::size_t i = 0; i < pts.size(); ++i) {
        normal += pts[i].cross(pts[(i + 1) % pts.size()]);
        centroid += pts[i];
      }
      centroid /= static_cast<double>(pts.size());
      double score = 0.0;
      for (int e : loop) {
        const EdgeDef& def = edges[static_cast<std::size_t>(e)];
        const int inside_corner = inside(def.c0) ? def.c0 : def.c1;
        score += normal.dot(corner_pos(inside_corner) - centroid);
      }
      if (score == 0.0)
        throw std::logic_error("case table: cannot orient loop");
      if (score > 0.0) std::reverse(loop.begin(), loop.end());

      for (std::size_t i = 1; i + 1 < loop.size(); ++i)
        table[static_cast<std::size_t>(config)].push_back(
            {static_cast<std::int8_t>(loop[0]),
             static_cast<std::int8_t>(loop[i]),
             static_cast<std::int8_t>(loop[i + 1])});
    }
  }
  return table;
}

inline const CaseTable& case_table() {
  static const CaseTable table = derive_case_table();
  return table;
}

}  // namespace mc_detail

/// Extracts the iso-surface of a score grid as a triangle mesh in the grid's
/// frame, faces wound counter-clockwise seen from outside. iso must lie in
/// (0, 1] so that the implicit out-of-grid samples (score 0) read as
/// outside; cells exactly at iso count as inside, matching threshold_grid.
inline TriangleMesh marching_cubes(const ScoreGrid& grid, double iso = 0.5) {
  if (!(iso > 0.0 && iso <= 1.0))
    throw ValidationError("marching cubes iso must be in (0, 1]");
  grid.spec.validate();
  const int n = grid.spec.resolution;
  const auto& table = mc_detail::case_table();
  const auto& edges = mc_detail::edge_defs();

  const auto sample = [&](int x, int y, int z) -> double {
    if (x < 0 || y < 0 || z < 0 || x >= n || y >= n || z >= n) return 0.0;
    return static_cast<double>(grid.scores[grid.spec.index(x, y, z)]);
  };

  TriangleMesh mesh;
  std::unordered_map<std::int64_t, std::int32_t> vertex_of_edge;

  // Vertex on the lattice edge starting at node (x,y,z) along axis.
  const auto edge_vertex = [&](int x, int y, int z, int axis) {
    const std::int64_t span = n + 2;
    const std::int64_t node =
        ((static_cast<std::int64_t>(x) + 1) * span + (y + 1)) * span + (z + 1);
    const std::int64_t key = node * 3 + axis;
    const auto it = vertex_of_edge.find(key);
    if (it != vertex_of_edge.end()) return it->second;

    const double v0 = sample(x, y, z);
    const double v1 = sample(x + (axis == 0), y + (axis == 1),
                             z + (axis == 2));
    double t = (iso - v0) / (v1 - v0);  // cut edges never have v0 == v1
    t = std::clamp(t, 0.0, 1.0);
    Vec3 node_pos = Vec3(x, y, z) + Vec3::Constant(0.5);
    node_pos[axis] += t;
    const std::int32_t id = static_cast<std::int32_t>(mesh.vertices.size());
    mesh.vertices.push_back(grid.spec.origin +
                            grid.spec.voxel_size * node_pos);
    vertex_of_edge.emplace(key, id);
    return id;
  };

  for (int x = -1; x < n; ++x) {
    for (int y = -1; y < n; ++y) {
      for (int z = -1; z < n; ++z) {
        int config = 0;
        for (int c = 0; c < 8; ++c) {
          const double v =
              sample(x + (c & 1), y + ((c >> 1) & 1), z + ((c >> 2) & 1));
          if (v >= iso) config |= 1 << c;
        }
        if (config == 0 || config == 255) continue;
        for (const auto& tri : table[static_cast<std::size_t>(config)]) {
          std::int32_t ids[3];
          for (int k = 0; k < 3; ++k) {
            const auto& def = edges[static_cast<std::size_t>(tri[k])];
            ids[k] = edge_vertex(x + (def.c0 & 1), y + ((def.c0 >> 1) & 1),
                                 z + ((def.c0 >> 2) & 1), def.axis);
          }
          if (ids[0] == ids[1] || ids[1] == ids[2] || ids[0] == ids[2])
            continue;  // degenerate: cut points coincided on a lattice node
          mesh.faces.push_back({ids[0], ids[1], ids[2]});
        }
      }
    }
  }
  return mesh;
}

}  // namespace nbvox
