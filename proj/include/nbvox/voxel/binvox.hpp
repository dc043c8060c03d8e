#pragma once

// binvox occupancy file I/O (format of Patrick Min's binvox tool, version 1).
//
//   #binvox 1
//   dim N N N
//   translate tx ty tz
//   scale s
//   data
//   <RLE byte pairs: value, count in 1..255>
//
// Voxel order is y fastest, then z, then x, which matches BinaryGrid's
// storage layout, so the payload maps 1:1 onto the occupancy vector.
// translate carries the grid origin and scale the full side length
// (resolution * voxel_size). scale/dim double-rounds, so an extra "#voxel"
// comment line carries the cell size verbatim; readers that do not know it
// skip it like any unrecognized header line, ours prefers it. Floats are
// printed with enough digits that write/read round-trips exactly.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "nbvox/core/error.hpp"
#include "nbvox/voxel/grid.hpp"

namespace nbvox {

inline void save_binvox(const BinaryGrid& grid, std::ostream& out) {
  const GridSpec& spec = grid.spec;
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "#binvox 1\ndim %d %d %d\ntranslate %.17g %.17g %.17g\n"
                "scale %.17g\n#voxel %.17g\ndata\n",
                spec.resolution, spec.resolution, spec.resolution,
                spec.origin.x(), spec.origin.y(), spec.origin.z(),
                spec.side_length(), spec.voxel_size);
  out << buf;
  const std::vector<std::uint8_t>& cells = grid.occupied;
  std::size_t i = 0;
  while (i < cells.size()) {
    const std::uint8_t value = cells[i] ? 1 : 0;
    std::size_t run = 1;
    while (i + run < cells.size() && run < 255 &&
           (cells[i + run] ? 1 : 0) == value)
      ++run;
    const char pair[2] = {static_cast<char>(value),
                          static_cast<char>(run)};
    out.write(pair, 2);
    i += run;
  }
  if (!out) throw IoError("binvox write failed");
}

inline void save_binvox(const BinaryGrid& grid, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  save_binvox(grid, out);
}

inline BinaryGrid load_binvox(std::istream& in,
                              const std::string& path = "<stream>") {
  std::string line;
  if (!std::getline(in, line) || line.rfind("#binvox", 0) != 0)
    throw ParseError(path + ": missing #binvox header");
  int dims[3] = {0, 0, 0};
  Vec3 translate = Vec3::Zero();
  double scale = 1.0;
  double voxel = 0.0;
  bool have_dim = false;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "data") break;
    if (tag == "dim") {
      if (!(ls >> dims[0] >> dims[1] >> dims[2]))
        throw ParseError(path + ": malformed dim line");
      have_dim = true;
    } else if (tag == "translate") {
      if (!(ls >> translate.x() >> translate.y() >> translate.z()))
        throw ParseError(path + ": malformed translate line");
    } else if (tag == "scale") {
      if (!(ls >> scale)) throw ParseError(path + ": malformed scale line");
    } else if (tag == "#voxel") {
      if (!(ls >> voxel)) throw ParseError(path + ": malformed #voxel line");
    }
    // Unknown header lines are skipped, as the reference reader does.
  }
  if (!have_dim) throw ParseError(path + ": missing dim line");
  if (dims[0] != dims[1] || dims[1] != dims[2] || dims[0] < 1)
    throw ParseError(path + ": grid must be cubical and non-empty");

  GridSpec spec;
  spec.resolution = dims[0];
  spec.origin = translate;
  spec.voxel_size = voxel > 0.0 ? voxel : scale / dims[0];
  BinaryGrid grid(spec);

  std::size_t filled = 0;
  char pair[2];
  while (filled < grid.occupied.size()) {
    if (!in.read(pair, 2))
      throw ParseError(path + ": truncated voxel data at cell " +
                       std::to_string(filled));
    const std::uint8_t value = static_cast<std::uint8_t>(pair[0]);
    const std::size_t run = static_cast<std::uint8_t>(pair[1]);
    if (value > 1)
      throw ParseError(path + ": voxel value " + std::to_string(value) +
                       " out of range");
    if (run == 0) throw ParseError(path + ": zero-length run");
    if (filled + run > grid.occupied.size())
      throw ParseError(path + ": voxel data overruns grid");
    for (std::size_t i = 0; i < run; ++i) grid.occupied[filled + i] = value;
    filled += run;
  }
  if (in.peek() != std::istream::traits_type::eof())
    throw ParseError(path + ": trailing data after the final run");
  return grid;
}

inline BinaryGrid load_binvox(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open binvox file: " + path);
  return load_binvox(in, path);
}

}  // namespace nbvox
