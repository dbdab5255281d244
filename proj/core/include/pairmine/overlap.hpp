#pragma once

#include <cstdint>
#include <vector>

#include "pairmine/homography.hpp"

namespace pairmine {

/// Partition of an image into non-overlapping patch_size x patch_size
/// squares; trailing pixels that do not fill a patch are ignored.
/// Patch index = row * cols + col.
struct PatchGrid {
  int patch_size = 16;
  int rows = 0;
  int cols = 0;
  int image_width = 0;
  int image_height = 0;

  static PatchGrid make(int image_width, int image_height, int patch_size);

  int patch_count() const { return rows * cols; }
};

struct CorrespondenceEntry {
  int src_patch = 0;
  int dst_patch = 0;
  int votes = 0;
};

/// Injective partial map from source patches to destination patches,
/// entries sorted by src_patch.
struct CorrespondenceMap {
  std::vector<CorrespondenceEntry> entries;
};

enum class RejectReason { none, too_low, too_high, too_few_matches, no_model };

const char* to_string(RejectReason reason);

struct OverlapReport {
  double overlap_12 = 0.0;
  double overlap_21 = 0.0;
  double overlap = 0.0;
  bool accepted = false;
  RejectReason reject_reason = RejectReason::none;
};

/// Majority-vote patch correspondence: n_points uniform in-patch offsets are
/// drawn once with the seeded generator and reused for every source patch
/// (common-mode noise, so neighboring patches flip winners together rather
/// than colliding in dedup), mapped through H, and binned into destination
/// patches ("outside" when the mapped point leaves the destination image or
/// the mapping is projectively degenerate). The winner
/// is the patch with the most votes (ties break to the lower patch index;
/// "outside" wins only with strictly more votes than every patch). Source
/// patches whose winner is "outside" are omitted. When several source
/// patches share a destination winner, only the one with the highest vote
/// count survives (ties break to the lower src index).
CorrespondenceMap correspond_patches(const Homography& H,
                                     const PatchGrid& src_grid,
                                     const PatchGrid& dst_grid, int n_points,
                                     std::uint64_t rng_seed);

/// Fraction of source patches with a surviving correspondence.
double directional_overlap(const CorrespondenceMap& map,
                           const PatchGrid& src_grid);

struct OverlapParams {
  int n_points = 100;
  double accept_lo = 0.50;
  double accept_hi = 0.75;
};

struct SymmetricOverlap {
  OverlapReport report;
  CorrespondenceMap map_12;
  CorrespondenceMap map_21;
};

/// Runs correspond_patches with H (grid1 -> grid2) and H^-1 (grid2 -> grid1)
/// on independent subseeds; overlap is the minimum of the two directions and
/// acceptance follows the inclusive [accept_lo, accept_hi] band.
SymmetricOverlap symmetric_overlap(const Homography& H, const PatchGrid& grid1,
                                   const PatchGrid& grid2,
                                   const OverlapParams& params,
                                   std::uint64_t rng_seed);

/// Applies the inclusive acceptance band to report.overlap, updating
/// `accepted` and `reject_reason` in place and returning `accepted`.
/// Throws ParamError unless 0 <= lo < hi <= 1.
bool accept_pair(OverlapReport& report, double lo, double hi);

}  // namespace pairmine
