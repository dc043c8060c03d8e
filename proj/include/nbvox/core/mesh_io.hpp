#pragma once

// Triangle mesh readers/writers for OFF, OBJ and STL. Format is picked by
// file extension. Polygonal faces are fan-triangulated on load; faces with
// repeated vertex indices are dropped (counted, reported once per load on
// stderr). Parse errors carry the 1-based line number.

#include <array>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "nbvox/core/error.hpp"
#include "nbvox/core/geometry.hpp"

namespace nbvox {

namespace detail {

inline std::string lowercase_extension(const std::string& path) {
  const std::size_t dot = path.find_last_of('.');
  if (dot == std::string::npos) return "";
  std::string ext = path.substr(dot + 1);
  for (char& c : ext) c = static_cast<char>(std::tolower(c));
  return ext;
}

inline bool is_blank_or_comment(const std::string& line, char comment) {
  for (char c : line) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    return c == comment;
  }
  return true;
}

[[noreturn]] inline void parse_fail(const std::string& path, std::size_t line,
                                    const std::string& what) {
  throw ParseError(path + ":" + std::to_string(line) + ": " + what);
}

inline void require_finite(const std::string& path, std::size_t line,
                           const Vec3& v) {
  if (!v.allFinite()) parse_fail(path, line, "non-finite vertex coordinate");
}

/// Appends a polygon as a triangle fan, dropping triangles with repeated
/// indices. Returns how many were dropped.
inline int append_fan(std::vector<std::array<std::int32_t, 3>>& faces,
                      const std::vector<std::int32_t>& poly) {
  int dropped = 0;
  for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
    const std::int32_t a = poly[0], b = poly[i], c = poly[i + 1];
    if (a == b || b == c || a == c) {
      ++dropped;
      continue;
    }
    faces.push_back({a, b, c});
  }
  return dropped;
}

inline void warn_dropped(const std::string& path, int dropped) {
  if (dropped > 0)
    std::cerr << "nbvox: " << path << ": dropped " << dropped
              << " degenerate face(s)\n";
}

inline TriangleMesh load_off(const std::string& path, std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  auto next_line = [&](const char* what) {
    while (std::getline(in, line)) {
      ++lineno;
      if (!is_blank_or_comment(line, '#')) return;
    }
    parse_fail(path, lineno, std::string("unexpected end of file, expected ") +
                                 what);
  };

  next_line("OFF header");
  std::size_t nv = 0, nf = 0;
  long ne = 0;
  bool have_counts = false;
  {
    std::istringstream ls(line);
    std::string first;
    ls >> first;
    if (first == "OFF" || first == "off") {
      // Counts may share the header line or follow on the next one.
      if (ls >> nv >> nf >> ne) have_counts = true;
    } else {
      // Headerless variant: the first line is already the counts.
      std::istringstream cs(line);
      if (!(cs >> nv >> nf >> ne))
        parse_fail(path, lineno, "expected OFF header or counts");
      have_counts = true;
    }
  }
  if (!have_counts) {
    next_line("vertex and face counts");
    std::istringstream cs(line);
    if (!(cs >> nv >> nf >> ne))
      parse_fail(path, lineno, "malformed count line");
  }
  TriangleMesh mesh;
  mesh.vertices.reserve(nv);
  for (std::size_t i = 0; i < nv; ++i) {
    next_line("vertex");
    std::istringstream vs(line);
    Vec3 v;
    if (!(vs >> v.x() >> v.y() >> v.z()))
      parse_fail(path, lineno, "malformed vertex");
    require_finite(path, lineno, v);
    mesh.vertices.push_back(v);
  }
  int dropped = 0;
  for (std::size_t i = 0; i < nf; ++i) {
    next_line("face");
    std::istringstream fs(line);
    std::size_t arity = 0;
    if (!(fs >> arity) || arity < 3)
      parse_fail(path, lineno, "malformed face arity");
    std::vector<std::int32_t> poly(arity);
    for (std::size_t k = 0; k < arity; ++k) {
      long idx = 0;
      if (!(fs >> idx)) parse_fail(path, lineno, "truncated face");
      if (idx < 0 || static_cast<std::size_t>(idx) >= mesh.vertices.size())
        parse_fail(path, lineno,
                   "vertex index " + std::to_string(idx) + " out of range");
      poly[k] = static_cast<std::int32_t>(idx);
    }
    dropped += append_fan(mesh.faces, poly);
  }
  warn_dropped(path, dropped);
  return mesh;
}

inline TriangleMesh load_obj(const std::string& path, std::istream& in) {
  TriangleMesh mesh;
  std::string line;
  std::size_t lineno = 0;
  int dropped = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      Vec3 v;
      if (!(ls >> v.x() >> v.y() >> v.z()))
        parse_fail(path, lineno, "malformed vertex");
      require_finite(path, lineno, v);
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<std::int32_t> poly;
      std::string ref;
      while (ls >> ref) {
        // Keep only the vertex index of "v", "v/vt", "v//vn", "v/vt/vn".
        const std::size_t slash = ref.find('/');
        const std::string head =
            slash == std::string::npos ? ref : ref.substr(0, slash);
        long idx = 0;
        try {
          idx = std::stol(head);
        } catch (const std::exception&) {
          parse_fail(path, lineno, "malformed face reference '" + ref + "'");
        }
        if (idx < 0)  // relative to the end of the current vertex list
          idx = static_cast<long>(mesh.vertices.size()) + idx + 1;
        if (idx < 1 || static_cast<std::size_t>(idx) > mesh.vertices.size())
          parse_fail(path, lineno,
                     "vertex index " + std::to_string(idx) + " out of range");
        poly.push_back(static_cast<std::int32_t>(idx - 1));
      }
      if (poly.size() < 3) parse_fail(path, lineno, "face with < 3 vertices");
      dropped += append_fan(mesh.faces, poly);
    }
    // Other tags (vn, vt, usemtl, o, g, s, mtllib, ...) are ignored.
  }
  warn_dropped(path, dropped);
  return mesh;
}

inline TriangleMesh load_stl(const std::string& path, std::istream& in) {
  // Sniff ASCII vs binary: ASCII files start with "solid" AND contain
  // "facet" early on. Binary files may also start with "solid" in the
  // comment header, so the keyword check alone is not enough.
  std::string head(512, '\0');
  in.read(head.data(), static_cast<std::streamsize>(head.size()));
  const std::size_t got = static_cast<std::size_t>(in.gcount());
  head.resize(got);
  in.clear();
  in.seekg(0);
  const bool ascii = head.rfind("solid", 0) == 0 &&
                     head.find("facet") != std::string::npos;

  TriangleMesh mesh;
  int dropped = 0;
  // STL repeats vertices per facet; weld exact duplicates so downstream
  // adjacency (marching cubes checks, Hausdorff sampling) sees one surface.
  struct VecLess {
    bool operator()(const Vec3& a, const Vec3& b) const {
      if (a.x() != b.x()) return a.x() < b.x();
      if (a.y() != b.y()) return a.y() < b.y();
      return a.z() < b.z();
    }
  };
  std::map<Vec3, std::int32_t, VecLess> index;
  auto vertex_id = [&](const Vec3& v) {
    auto [it, inserted] =
        index.emplace(v, static_cast<std::int32_t>(mesh.vertices.size()));
    if (inserted) mesh.vertices.push_back(v);
    return it->second;
  };
  auto push_tri = [&](const Vec3& a, const Vec3& b, const Vec3& c) {
    const std::int32_t ia = vertex_id(a), ib = vertex_id(b), ic = vertex_id(c);
    if (ia == ib || ib == ic || ia == ic) {
      ++dropped;
      return;
    }
    mesh.faces.push_back({ia, ib, ic});
  };

  if (ascii) {
    std::string line;
    std::size_t lineno = 0;
    std::vector<Vec3> tri;
    while (std::getline(in, line)) {
      ++lineno;
      std::istringstream ls(line);
      std::string tag;
      if (!(ls >> tag)) continue;
      if (tag == "vertex") {
        Vec3 v;
        if (!(ls >> v.x() >> v.y() >> v.z()))
          parse_fail(path, lineno, "malformed STL vertex");
        require_finite(path, lineno, v);
        tri.push_back(v);
      } else if (tag == "endfacet") {
        if (tri.size() != 3)
          parse_fail(path, lineno, "facet with " + std::to_string(tri.size()) +
                                       " vertices");
        push_tri(tri[0], tri[1], tri[2]);
        tri.clear();
      }
    }
    if (!tri.empty()) parse_fail(path, lineno, "truncated STL facet");
  } else {
    char header[80];
    in.read(header, 80);
    std::uint32_t count = 0;
    in.read(reinterpret_cast<char*>(&count), 4);
    if (!in) throw ParseError(path + ": truncated binary STL header");
    for (std::uint32_t f = 0; f < count; ++f) {
      float buf[12];
      in.read(reinterpret_cast<char*>(buf), sizeof(buf));
      std::uint16_t attr = 0;
      in.read(reinterpret_cast<char*>(&attr), 2);
      if (!in)
        throw ParseError(path + ": truncated binary STL at facet " +
                         std::to_string(f));
      Vec3 v[3];
      for (int k = 0; k < 3; ++k) {
        v[k] = Vec3(buf[3 + 3 * k], buf[4 + 3 * k], buf[5 + 3 * k]);
        if (!v[k].allFinite())
          throw ParseError(path + ": non-finite vertex in facet " +
                           std::to_string(f));
      }
      push_tri(v[0], v[1], v[2]);
    }
  }
  warn_dropped(path, dropped);
  return mesh;
}

}  // namespace detail

inline TriangleMesh load_mesh(const std::string& path) {
  const std::string ext = detail::lowercase_extension(path);
  const bool binary = ext == "stl";
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw IoError("cannot open mesh file: " + path);
  if (ext == "off") return detail::load_off(path, in);
  if (ext == "obj") return detail::load_obj(path, in);
  if (ext == "stl") return detail::load_stl(path, in);
  throw ValidationError("unsupported mesh extension '." + ext + "': " + path);
}

inline void save_mesh_off(const TriangleMesh& mesh, std::ostream& out) {
  out << "OFF\n" << mesh.vertices.size() << ' ' << mesh.faces.size() << " 0\n";
  char buf[96];
  for (const Vec3& v : mesh.vertices) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", v.x(), v.y(),
                  v.z());
    out << buf;
  }
  for (const auto& f : mesh.faces)
    out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
}

inline void save_mesh_obj(const TriangleMesh& mesh, std::ostream& out) {
  char buf[96];
  for (const Vec3& v : mesh.vertices) {
    std::snprintf(buf, sizeof(buf), "v %.17g %.17g %.17g\n", v.x(), v.y(),
                  v.z());
    out << buf;
  }
  for (const auto& f : mesh.faces)
    out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
}

inline void save_mesh_stl(const TriangleMesh& mesh, std::ostream& out) {
  char header[80] = {};
  std::strncpy(header, "binary stl", sizeof(header) - 1);
  out.write(header, 80);
  const std::uint32_t count = static_cast<std::uint32_t>(mesh.faces.size());
  out.write(reinterpret_cast<const char*>(&count), 4);
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const Vec3 a = mesh.face_vertex(f, 0);
    const Vec3 b = mesh.face_vertex(f, 1);
    const Vec3 c = mesh.face_vertex(f, 2);
    Vec3 n = (b - a).cross(c - a);
    const double len = n.norm();
    n = len > 0.0 ? Vec3(n / len) : Vec3::Zero();
    float buf[12] = {
        static_cast<float>(n.x()), static_cast<float>(n.y()),
        static_cast<float>(n.z()), static_cast<float>(a.x()),
        static_cast<float>(a.y()), static_cast<float>(a.z()),
        static_cast<float>(b.x()), static_cast<float>(b.y()),
        static_cast<float>(b.z()), static_cast<float>(c.x()),
        static_cast<float>(c.y()), static_cast<float>(c.z())};
    out.write(reinterpret_cast<const char*>(buf), sizeof(buf));
    const std::uint16_t attr = 0;
    out.write(reinterpret_cast<const char*>(&attr), 2);
  }
}

inline void save_mesh(const TriangleMesh& mesh, const std::string& path) {
  const std::string ext = detail::lowercase_extension(path);
  const bool binary = ext == "stl";
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw IoError("cannot open for writing: " + path);
  if (ext == "off") save_mesh_off(mesh, out);
  else if (ext == "obj") save_mesh_obj(mesh, out);
  else if (ext == "stl") save_mesh_stl(mesh, out);
  else
    throw ValidationError("unsupported mesh extension '." + ext + "': " +
                          path);
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace nbvox
