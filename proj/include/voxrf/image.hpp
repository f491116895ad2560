#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "voxrf/common.hpp"

namespace voxrf {

// Row-major raster, channel-interleaved, values nominally in [0, 1] for
// color. Depth and accumulation rasters are single-channel and unbounded.
struct Image {
  int width = 0, height = 0, channels = 0;
  std::vector<float> data;

  Image() = default;
  Image(int w, int h, int c, float fill = 0.0f)
      : width(w), height(h), channels(c), data(static_cast<std::size_t>(w) * h * c, fill) {
    if (w <= 0 || h <= 0 || c <= 0) throw ValidationError("image dimensions must be positive");
  }

  float& at(int x, int y, int c) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  float at(int x, int y, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
};

// 8-bit PNG. Color images are written as RGB; single-channel as grayscale.
// Reads expand gray/RGBA to the stored channel count of the file.
void write_png(const std::string& path, const Image& img);
Image read_png(const std::string& path);

// Portable float map, little-endian (negative scale), bottom row first.
// Used for depth and accumulation rasters where 8 bits would not do.
void write_pfm(const std::string& path, const Image& img);
Image read_pfm(const std::string& path);

inline uint8_t quantize8(float v) {
  float c = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
  return static_cast<uint8_t>(c * 255.0f + 0.5f);
}

}  // namespace voxrf
