#pragma once

#include <cstdint>

#include "pairmine/image.hpp"

namespace testsupport {

/// Seeded multi-octave value-noise texture in [0, 1]. Rich in structure at
/// several scales, so the detector finds plenty of keypoints everywhere.
pairmine::RasterImage make_texture(int width, int height, std::uint64_t seed);

/// Axis-aligned crop; the window must lie inside the source.
pairmine::RasterImage crop(const pairmine::RasterImage& img, int x0, int y0,
                           int width, int height);

/// Checkerboard of square_px x square_px tiles, values 0 and 1.
pairmine::RasterImage make_checkerboard(int width, int height, int square_px);

/// Isotropic Gaussian blob exp(-r^2 / (2 sigma^2)) centered at (cx, cy) on a
/// black background.
pairmine::RasterImage make_blob(int width, int height, double cx, double cy,
                                double sigma);

/// Exact 90-degree counterclockwise rotation: (x, y) -> (y, w-1-x) in the
/// output frame.
pairmine::RasterImage rotate90_ccw(const pairmine::RasterImage& img);

/// Rotation by an arbitrary angle about the image center with bilinear
/// sampling; pixels pulled from outside the source become 0.
pairmine::RasterImage rotate_about_center(const pairmine::RasterImage& img,
                                          double radians);

/// Zeroes everything outside the centered disc of the given radius. Keeps
/// rotation tests free of frame-boundary artifacts.
pairmine::RasterImage disc_mask(const pairmine::RasterImage& img,
                                double radius);

}  // namespace testsupport
