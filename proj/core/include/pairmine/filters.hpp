#pragma once

#include "pairmine/image.hpp"

namespace pairmine {

/// Separable Gaussian blur on a single-channel image. Kernel radius is
/// ceil(3*sigma), normalized to sum 1, with mirror boundary handling.
/// Throws ParamError for sigma <= 0 and DimensionError for multi-channel
/// input.
RasterImage gaussian_blur(const RasterImage& img, double sigma);

/// Decimation by 2: keeps every second pixel starting at (0, 0), yielding a
/// floor(w/2) x floor(h/2) image. Throws DimensionError when either side is
/// below 2 or the image is not single-channel.
RasterImage downsample2(const RasterImage& img);

/// Bilinear resize to (new_width, new_height), single-channel. Used by tests
/// and scale-covariance checks, not by the detector itself.
RasterImage resize_bilinear(const RasterImage& img, int new_width,
                            int new_height);

}  // namespace pairmine
