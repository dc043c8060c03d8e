#pragma once

// Score grid file format (.sgrid): a small text header followed by the raw
// float32 payload in storage order (y fastest, then z, then x).
//
//   #sgrid 1
//   dim N
//   origin x y z
//   voxel_size s
//   data
//   <N^3 little-endian float32>
//
// Header floats are printed with %.17g and the payload is copied verbatim,
// so write/read round-trips bit-exactly.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "nbvox/core/error.hpp"
#include "nbvox/voxel/grid.hpp"

namespace nbvox {

inline void save_score_grid(const ScoreGrid& grid, std::ostream& out) {
  for (float s : grid.scores)
    if (!(s >= 0.0f && s <= 1.0f))
      throw ValidationError("refusing to write score outside [0, 1]");
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "#sgrid 1\ndim %d\norigin %.17g %.17g %.17g\n"
                "voxel_size %.17g\ndata\n",
                grid.spec.resolution, grid.spec.origin.x(),
                grid.spec.origin.y(), grid.spec.origin.z(),
                grid.spec.voxel_size);
  out << buf;
  out.write(reinterpret_cast<const char*>(grid.scores.data()),
            static_cast<std::streamsize>(grid.scores.size() * sizeof(float)));
  if (!out) throw IoError("score grid write failed");
}

inline void save_score_grid(const ScoreGrid& grid, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  save_score_grid(grid, out);
}

inline ScoreGrid load_score_grid(std::istream& in,
                                 const std::string& path = "<stream>") {
  std::string line;
  if (!std::getline(in, line) || line.rfind("#sgrid", 0) != 0)
    throw ParseError(path + ": missing #sgrid header");
  GridSpec spec;
  spec.resolution = 0;
  bool have_size = false;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "data") break;
    if (tag == "dim") {
      if (!(ls >> spec.resolution))
        throw ParseError(path + ": malformed dim line");
    } else if (tag == "origin") {
      if (!(ls >> spec.origin.x() >> spec.origin.y() >> spec.origin.z()))
        throw ParseError(path + ": malformed origin line");
    } else if (tag == "voxel_size") {
      if (!(ls >> spec.voxel_size))
        throw ParseError(path + ": malformed voxel_size line");
      have_size = true;
    } else {
      throw ParseError(path + ": unknown header line '" + tag + "'");
    }
  }
  if (spec.resolution < 1 || !have_size)
    throw ParseError(path + ": incomplete header");
  try {
    spec.validate();
  } catch (const ValidationError& e) {
    throw ParseError(path + ": " + e.what());
  }
  ScoreGrid grid(spec);
  in.read(reinterpret_cast<char*>(grid.scores.data()),
          static_cast<std::streamsize>(grid.scores.size() * sizeof(float)));
  if (static_cast<std::size_t>(in.gcount()) !=
      grid.scores.size() * sizeof(float))
    throw ParseError(path + ": payload shorter than " +
                     std::to_string(grid.scores.size()) + " cells");
  for (float s : grid.scores)
    if (!(s >= 0.0f && s <= 1.0f))
      throw ParseError(path + ": score outside [0, 1]");
  return grid;
}

inline ScoreGrid load_score_grid(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open score grid: " + path);
  return load_score_grid(in, path);
}

}  // namespace nbvox
