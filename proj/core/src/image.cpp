#include "pairmine/image.hpp"

namespace pairmine {

RasterImage to_gray(const RasterImage& img) {
  if (img.channels == 1) return img;
  RasterImage out = RasterImage::make(img.width, img.height, 1);
  const float* src = img.data.data();
  float* dst = out.data.data();
  const std::size_t n = img.pixel_count();
  for (std::size_t i = 0; i < n; ++i) {
    const float* p = src + i * 3;
    dst[i] = 0.299f * p[0] + 0.587f * p[1] + 0.114f * p[2];
  }
  return out;
}

RasterImage to_rgb(const RasterImage& img) {
  if (img.channels == 3) return img;
  RasterImage out = RasterImage::make(img.width, img.height, 3);
  const std::size_t n = img.pixel_count();
  for (std::size_t i = 0; i < n; ++i) {
    const float v = img.data[i];
    out.data[i * 3 + 0] = v;
    out.data[i * 3 + 1] = v;
    out.data[i * 3 + 2] = v;
  }
  return out;
}

}  // namespace pairmine
