#include "pairmine/overlay.hpp"

#include <algorithm>
#include <cmath>

#include "pairmine/errors.hpp"

namespace pairmine {
namespace {

struct Rgb {
  float r, g, b;
};

Rgb hsv_to_rgb(double h, double s, double v) {
  const double hh = h * 6.0;
  const int sector = static_cast<int>(hh) % 6;
  const double f = hh - std::floor(hh);
  const double p = v * (1.0 - s);
  const double q = v * (1.0 - s * f);
  const double t = v * (1.0 - s * (1.0 - f));
  switch (sector) {
    case 0: return {static_cast<float>(v), static_cast<float>(t), static_cast<float>(p)};
    case 1: return {static_cast<float>(q), static_cast<float>(v), static_cast<float>(p)};
    case 2: return {static_cast<float>(p), static_cast<float>(v), static_cast<float>(t)};
    case 3: return {static_cast<float>(p), static_cast<float>(q), static_cast<float>(v)};
    case 4: return {static_cast<float>(t), static_cast<float>(p), static_cast<float>(v)};
    default: return {static_cast<float>(v), static_cast<float>(p), static_cast<float>(q)};
  }
}

/// Palette keyed on the source patch index: the golden-ratio hue walk keeps
/// adjacent patch indices far apart in hue.
Rgb patch_color(int src_patch) {
  const double hue = std::fmod(src_patch * 0.61803398874989485, 1.0);
  return hsv_to_rgb(hue, 0.85, 0.95);
}

void tint_patch(RasterImage& canvas, int x0, int y0, int patch_size,
                const Rgb& color, float alpha) {
  for (int y = y0; y < y0 + patch_size; ++y) {
    for (int x = x0; x < x0 + patch_size; ++x) {
      float* px = &canvas.at(y, x, 0);
      px[0] = (1 - alpha) * px[0] + alpha * color.r;
      px[1] = (1 - alpha) * px[1] + alpha * color.g;
      px[2] = (1 - alpha) * px[2] + alpha * color.b;
    }
  }
}

void blit(RasterImage& canvas, const RasterImage& img, int x0) {
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < 3; ++c)
        canvas.at(y, x0 + x, c) = img.at(y, x, c);
}

}  // namespace

RasterImage render_correspondence_overlay(const RasterImage& img_a,
                                          const RasterImage& img_b,
                                          const PairRecord& record) {
  const auto check = [&](const RasterImage& img, const char* which) {
    if (img.width / record.patch_size != record.grid_cols ||
        img.height / record.patch_size != record.grid_rows)
      throw DimensionError(std::string("overlay: image ") + which +
                           " does not match the record grid");
  };
  check(img_a, "a");
  check(img_b, "b");

  const RasterImage rgb_a = to_rgb(img_a);
  const RasterImage rgb_b = to_rgb(img_b);

  const int width = img_a.width + kOverlayGap + img_b.width;
  const int height = std::max(img_a.height, img_b.height);
  RasterImage canvas = RasterImage::make(width, height, 3);
  blit(canvas, rgb_a, 0);
  blit(canvas, rgb_b, img_a.width + kOverlayGap);

  const int ps = record.patch_size;
  const int right_x0 = img_a.width + kOverlayGap;
  constexpr float kAlpha = 0.45f;
  for (const auto& c : record.correspondences) {
    const Rgb color = patch_color(c[0]);
    const int sr = c[0] / record.grid_cols;
    const int sc = c[0] % record.grid_cols;
    const int dr = c[1] / record.grid_cols;
    const int dc = c[1] % record.grid_cols;
    tint_patch(canvas, sc * ps, sr * ps, ps, color, kAlpha);
    tint_patch(canvas, right_x0 + dc * ps, dr * ps, ps, color, kAlpha);
  }
  return canvas;
}

}  // namespace pairmine
