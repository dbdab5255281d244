#pragma once

#include <string>

#include "pairmine/image.hpp"

namespace pairmine {

/// Decodes a PNG or JPEG file. 8-bit samples are scaled to [0, 1];
/// 16-bit PNGs are reduced to 8 bits first. Grayscale+alpha and RGBA
/// drop the alpha channel; palette PNGs are expanded to RGB.
/// Throws DecodeError on unreadable or unsupported input and
/// DimensionError on zero-sized images.
RasterImage decode_image(const std::string& path);

/// Writes img as an 8-bit PNG (gray or RGB). Values are clamped to [0, 1]
/// and rounded to the nearest byte. Throws IoError on failure.
void encode_png(const RasterImage& img, const std::string& path);

}  // namespace pairmine
