#pragma once

#include "pairmine/image.hpp"
#include "pairmine/mining.hpp"

namespace pairmine {

/// Side-by-side visualization: img_a and img_b on one canvas separated by an
/// 8 px gap, with both patches of every correspondence tinted the same color
/// (golden-ratio hue keyed on the source patch index, alpha 0.45).
/// Uncorresponded patches keep their original pixels. Throws DimensionError
/// when either image disagrees with the record's grid geometry.
RasterImage render_correspondence_overlay(const RasterImage& img_a,
                                          const RasterImage& img_b,
                                          const PairRecord& record);

inline constexpr int kOverlayGap = 8;

}  // namespace pairmine
