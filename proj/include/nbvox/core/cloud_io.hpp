#pragma once

// Plain-text point cloud I/O: one "x y z" triple per line, '#' comments and
// blank lines allowed.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "nbvox/core/error.hpp"
#include "nbvox/core/geometry.hpp"
#include "nbvox/core/mesh_io.hpp"

namespace nbvox {

inline PointCloud load_cloud_xyz(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open cloud file: " + path);
  PointCloud cloud;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::is_blank_or_comment(line, '#')) continue;
    std::istringstream ls(line);
    Vec3 p;
    if (!(ls >> p.x() >> p.y() >> p.z()))
      detail::parse_fail(path, lineno, "malformed point");
    detail::require_finite(path, lineno, p);
    cloud.points.push_back(p);
  }
  return cloud;
}

inline void save_cloud_xyz(const PointCloud& cloud, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  char buf[96];
  for (const Vec3& p : cloud.points) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", p.x(), p.y(),
                  p.z());
    out << buf;
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace nbvox
