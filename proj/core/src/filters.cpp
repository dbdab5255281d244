#include "pairmine/filters.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "pairmine/errors.hpp"

namespace pairmine {
namespace {

std::vector<float> gaussian_kernel(double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<float> kernel(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-(i * i) / (2.0 * sigma * sigma));
    kernel[i + radius] = static_cast<float>(v);
    sum += v;
  }
  const float inv = static_cast<float>(1.0 / sum);
  for (float& v : kernel) v *= inv;
  return kernel;
}

// Mirror index into [0, n): reflection without repeating the edge sample,
// folded over the period 2(n-1).
inline int mirror(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i = std::abs(i) % period;
  return i < n ? i : period - i;
}

void require_gray(const RasterImage& img) {
  if (img.channels != 1)
    throw DimensionError("filter requires a single-channel image");
}

}  // namespace

RasterImage gaussian_blur(const RasterImage& img, double sigma) {
  if (!(sigma > 0.0)) throw ParamError("gaussian_blur: sigma must be > 0");
  require_gray(img);

  const std::vector<float> kernel = gaussian_kernel(sigma);
  const int radius = (static_cast<int>(kernel.size()) - 1) / 2;
  const int w = img.width;
  const int h = img.height;

  RasterImage tmp = RasterImage::make(w, h, 1);
  for (int y = 0; y < h; ++y) {
    const float* row = img.data.data() + static_cast<std::size_t>(y) * w;
    float* out = tmp.data.data() + static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) {
      float acc = 0.0f;
      if (x - radius >= 0 && x + radius < w) {
        const float* p = row + (x - radius);
        for (int k = 0; k < 2 * radius + 1; ++k) acc += p[k] * kernel[k];
      } else {
        for (int k = -radius; k <= radius; ++k)
          acc += row[mirror(x + k, w)] * kernel[k + radius];
      }
      out[x] = acc;
    }
  }

  RasterImage out = RasterImage::make(w, h, 1);
  for (int y = 0; y < h; ++y) {
    float* dst = out.data.data() + static_cast<std::size_t>(y) * w;
    if (y - radius >= 0 && y + radius < h) {
      for (int x = 0; x < w; ++x) {
        float acc = 0.0f;
        const float* p = tmp.data.data() +
                         static_cast<std::size_t>(y - radius) * w + x;
        for (int k = 0; k < 2 * radius + 1; ++k) acc += p[k * w] * kernel[k];
        dst[x] = acc;
      }
    } else {
      for (int x = 0; x < w; ++x) {
        float acc = 0.0f;
        for (int k = -radius; k <= radius; ++k)
          acc += tmp.data[static_cast<std::size_t>(mirror(y + k, h)) * w + x] *
                 kernel[k + radius];
        dst[x] = acc;
      }
    }
  }
  return out;
}

RasterImage downsample2(const RasterImage& img) {
  require_gray(img);
  if (img.width < 2 || img.height < 2)
    throw DimensionError("downsample2 requires both sides >= 2");
  const int ow = img.width / 2;
  const int oh = img.height / 2;
  RasterImage out = RasterImage::make(ow, oh, 1);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) out.at(y, x) = img.at(2 * y, 2 * x);
  return out;
}

RasterImage resize_bilinear(const RasterImage& img, int new_width,
                            int new_height) {
  require_gray(img);
  if (new_width <= 0 || new_height <= 0)
    throw DimensionError("resize_bilinear: target dimensions must be positive");
  RasterImage out = RasterImage::make(new_width, new_height, 1);
  const double sx = static_cast<double>(img.width) / new_width;
  const double sy = static_cast<double>(img.height) / new_height;
  for (int y = 0; y < new_height; ++y) {
    const double fy = std::max(0.0, (y + 0.5) * sy - 0.5);
    const int y0 = std::min(static_cast<int>(fy), img.height - 1);
    const int y1 = std::min(y0 + 1, img.height - 1);
    const float wy = static_cast<float>(fy - y0);
    for (int x = 0; x < new_width; ++x) {
      const double fx = std::max(0.0, (x + 0.5) * sx - 0.5);
      const int x0 = std::min(static_cast<int>(fx), img.width - 1);
      const int x1 = std::min(x0 + 1, img.width - 1);
      const float wx = static_cast<float>(fx - x0);
      const float top = img.at(y0, x0) * (1 - wx) + img.at(y0, x1) * wx;
      const float bot = img.at(y1, x0) * (1 - wx) + img.at(y1, x1) * wx;
      out.at(y, x) = top * (1 - wy) + bot * wy;
    }
  }
  return out;
}

}  // namespace pairmine
