#pragma once

// Depth image persistence. The native format is a raw little-endian float32
// file (row-major, meters, 0 = invalid) plus a "<path>.json" sidecar holding
// the full camera model; that pair round-trips exactly. For visualization a
// 16-bit grayscale PNG in integer millimeters can be written alongside
// (lossy, write-only).

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <png.h>

#include "nbvox/core/error.hpp"
#include "nbvox/views/camera.hpp"

namespace nbvox {

inline void save_depth(const DepthImage& image, const std::string& path) {
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out.write(reinterpret_cast<const char*>(image.depth.data()),
              static_cast<std::streamsize>(image.depth.size() *
                                           sizeof(float)));
    if (!out) throw IoError("write failed: " + path);
  }
  std::ofstream side(path + ".json");
  if (!side) throw IoError("cannot open for writing: " + path + ".json");
  side << to_json(image.camera).dump(2) << '\n';
  if (!side) throw IoError("write failed: " + path + ".json");
}

inline DepthImage load_depth(const std::string& path) {
  Json meta;
  {
    std::ifstream side(path + ".json");
    if (!side) throw IoError("cannot open sidecar: " + path + ".json");
    try {
      side >> meta;
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path + ".json: " + e.what());
    }
  }
  DepthImage image(camera_from_json(meta, path + ".json"));

  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open depth file: " + path);
  in.read(reinterpret_cast<char*>(image.depth.data()),
          static_cast<std::streamsize>(image.depth.size() * sizeof(float)));
  if (static_cast<std::size_t>(in.gcount()) !=
      image.depth.size() * sizeof(float))
    throw ParseError(path + ": depth payload shorter than " +
                     std::to_string(image.depth.size()) + " samples");
  char extra;
  if (in.read(&extra, 1))
    throw ParseError(path + ": depth payload longer than camera dimensions");
  return image;
}

/// 16-bit grayscale PNG, one millimeter per count, invalid pixels 0. Values
/// above 65.535 m saturate.
inline void save_depth_png16(const DepthImage& image, const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw IoError("cannot open for writing: " + path);

  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    std::fclose(fp);
    throw IoError("libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw IoError("libpng write failed: " + path);
  }

  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.camera.width),
               static_cast<png_uint_32>(image.camera.height), 16,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::vector<std::uint8_t> row(static_cast<std::size_t>(image.camera.width) *
                                2);
  for (int y = 0; y < image.camera.height; ++y) {
    for (int x = 0; x < image.camera.width; ++x) {
      const float d = image.at(x, y);
      std::uint16_t mm = 0;
      if (d > 0.0f) {
        const long v = std::lround(static_cast<double>(d) * 1000.0);
        mm = static_cast<std::uint16_t>(v < 1 ? 1 : (v > 65535 ? 65535 : v));
      }
      row[static_cast<std::size_t>(x) * 2] =
          static_cast<std::uint8_t>(mm >> 8);  // PNG is big-endian
      row[static_cast<std::size_t>(x) * 2 + 1] =
          static_cast<std::uint8_t>(mm & 0xff);
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fclose(fp) != 0) throw IoError("close failed: " + path);
}

}  // namespace nbvox
