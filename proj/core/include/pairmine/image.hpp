#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "pairmine/errors.hpp"

namespace pairmine {

/// Dense raster of float samples, row-major, channel-interleaved.
/// channels is 1 (gray) or 3 (RGB). Decoded images carry values in [0, 1];
/// derived buffers (difference images and the like) may hold signed values.
struct RasterImage {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<float> data;

  static RasterImage make(int width, int height, int channels) {
    if (width <= 0 || height <= 0)
      throw DimensionError("image dimensions must be positive");
    if (channels != 1 && channels != 3)
      throw DimensionError("image must have 1 or 3 channels");
    RasterImage img;
    img.width = width;
    img.height = height;
    img.channels = channels;
    img.data.assign(static_cast<std::size_t>(width) * height * channels, 0.0f);
    return img;
  }

  float& at(int y, int x, int c = 0) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  float at(int y, int x, int c = 0) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }

  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * height;
  }

  bool same_shape(const RasterImage& other) const {
    return width == other.width && height == other.height &&
           channels == other.channels;
  }
};

/// Rec. 601 luma. A gray input is returned unchanged.
RasterImage to_gray(const RasterImage& img);

/// Gray to 3-channel by replication; RGB inputs pass through.
RasterImage to_rgb(const RasterImage& img);

}  // namespace pairmine
