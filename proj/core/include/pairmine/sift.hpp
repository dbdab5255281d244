#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "pairmine/image.hpp"

namespace pairmine {

/// Scale-space interest point in original-image coordinates.
/// `scale` is the absolute DoG scale (sigma in input pixels), `octave` and
/// `level` locate the detection in the pyramid, `response` is the
/// interpolated DoG value at the extremum.
struct Keypoint {
  double x = 0.0;
  double y = 0.0;
  double scale = 0.0;
  double orientation = 0.0;  // radians in [0, 2*pi)
  double response = 0.0;
  int octave = 0;
  int level = 0;
};

using KeypointSet = std::vector<Keypoint>;

struct Descriptor {
  std::array<float, 128> values{};
};

using DescriptorSet = std::vector<Descriptor>;

struct SiftParams {
  int intervals = 3;               // DoG scales per octave
  double base_sigma = 1.6;         // blur of pyramid level 0
  double camera_sigma = 0.5;       // assumed blur of the raw input
  double contrast_threshold = 0.03;
  double edge_ratio = 10.0;
  int max_octaves = 8;
  int min_dimension = 16;          // stop octaves below this size
  int max_refine_steps = 5;
  int orientation_bins = 36;
  double orientation_peak_ratio = 0.8;
  double descriptor_clamp = 0.2;
  std::size_t keypoint_cap = 2000;  // keep top-N by |response|
};

/// DoG extrema detection with subpixel refinement, contrast and edge
/// rejection, and per-keypoint orientation assignment. A keypoint with
/// several dominant orientations appears once per orientation. At most
/// params.keypoint_cap keypoints are returned, strongest |response| first,
/// with a deterministic position tie-break. Requires min(width, height) >= 32
/// and gray input.
KeypointSet detect_keypoints(const RasterImage& img, const SiftParams& params);

/// 4x4 spatial x 8 orientation-bin gradient descriptors in each keypoint's
/// rotated, scale-normalized frame. Keypoints whose support has no gradient
/// (zero norm) are dropped; the returned keypoint list is the surviving
/// subset, index-aligned with the descriptors.
struct DescribedSet {
  KeypointSet keypoints;
  DescriptorSet descriptors;
};
DescribedSet compute_descriptors(const RasterImage& img, const KeypointSet& kps,
                                 const SiftParams& params);

/// Keypoints as CSV lines "x,y,scale,orientation,response" for debugging.
std::string keypoints_to_csv(const KeypointSet& kps);

}  // namespace pairmine
