#include "pairmine/overlap.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "pairmine/errors.hpp"
#include "pairmine/rng.hpp"

namespace pairmine {

PatchGrid PatchGrid::make(int image_width, int image_height, int patch_size) {
  if (patch_size < 1) throw ParamError("patch_size must be >= 1");
  if (image_width < patch_size || image_height < patch_size)
    throw DimensionError("image smaller than one patch");
  PatchGrid g;
  g.patch_size = patch_size;
  g.cols = image_width / patch_size;
  g.rows = image_height / patch_size;
  g.image_width = image_width;
  g.image_height = image_height;
  return g;
}

const char* to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::none: return "none";
    case RejectReason::too_low: return "too_low";
    case RejectReason::too_high: return "too_high";
    case RejectReason::too_few_matches: return "too_few_matches";
    case RejectReason::no_model: return "no_model";
  }
  return "unknown";
}

CorrespondenceMap correspond_patches(const Homography& H,
                                     const PatchGrid& src_grid,
                                     const PatchGrid& dst_grid, int n_points,
                                     std::uint64_t rng_seed) {
  if (n_points < 1) throw ParamError("n_points must be >= 1");
  H.inverse();  // invertibility precondition; throws if singular

  const int n_patches = src_grid.patch_count();
  const int ps = src_grid.patch_size;
  const int dst_ps = dst_grid.patch_size;
  // Votes only count inside the patch-covered area; pixels in the
  // grid-trailing margin of the destination image are "outside".
  const double dst_w = static_cast<double>(dst_grid.cols) * dst_ps;
  const double dst_h = static_cast<double>(dst_grid.rows) * dst_ps;

  struct Winner {
    int src = 0;
    int dst = 0;
    int votes = 0;
  };
  std::vector<Winner> winners;
  winners.reserve(n_patches);

  // One offset table shared by every source patch. Sampling noise is then
  // common-mode: neighboring patches that straddle the same destination
  // boundary shift winners together instead of flipping independently and
  // merging in dedup, which would bias the census low.
  Rng rng(rng_seed);
  std::vector<Point2> offsets(static_cast<std::size_t>(n_points));
  for (Point2& o : offsets) {
    o.x = rng.next_double() * ps;
    o.y = rng.next_double() * ps;
  }

  std::vector<int> votes(static_cast<std::size_t>(dst_grid.patch_count()), 0);
  for (int p = 0; p < n_patches; ++p) {
    const int row = p / src_grid.cols;
    const int col = p % src_grid.cols;
    const double x0 = static_cast<double>(col) * ps;
    const double y0 = static_cast<double>(row) * ps;

    std::fill(votes.begin(), votes.end(), 0);
    int outside = 0;
    std::vector<int> touched;
    for (const Point2& o : offsets) {
      const Point2 src_pt{x0 + o.x, y0 + o.y};
      Point2 dst_pt;
      try {
        dst_pt = apply_homography(H, src_pt);
      } catch (const ProjectiveDegenerate&) {
        ++outside;
        continue;
      }
      if (dst_pt.x < 0 || dst_pt.x >= dst_w || dst_pt.y < 0 ||
          dst_pt.y >= dst_h) {
        ++outside;
        continue;
      }
      const int dc = static_cast<int>(dst_pt.x / dst_ps);
      const int dr = static_cast<int>(dst_pt.y / dst_ps);
      const int dp = dr * dst_grid.cols + dc;
      if (votes[dp] == 0) touched.push_back(dp);
      ++votes[dp];
    }

    int best_patch = -1;
    int best_votes = 0;
    std::sort(touched.begin(), touched.end());  // lowest-index tie-break
    for (int dp : touched) {
      if (votes[dp] > best_votes) {
        best_votes = votes[dp];
        best_patch = dp;
      }
    }
    // "Outside" suppresses the patch only on a strict majority over every
    // in-bounds candidate.
    if (best_patch >= 0 && outside <= best_votes)
      winners.push_back({p, best_patch, best_votes});
  }

  // Deduplicate by destination: the most-voted source survives, ties to the
  // lower source index (winners are already in ascending src order).
  std::map<int, Winner> by_dst;
  for (const Winner& w : winners) {
    auto [it, inserted] = by_dst.try_emplace(w.dst, w);
    if (!inserted && w.votes > it->second.votes) it->second = w;
  }

  CorrespondenceMap map;
  map.entries.reserve(by_dst.size());
  for (const auto& [dst, w] : by_dst)
    map.entries.push_back({w.src, w.dst, w.votes});
  std::sort(map.entries.begin(), map.entries.end(),
            [](const CorrespondenceEntry& a, const CorrespondenceEntry& b) {
              return a.src_patch < b.src_patch;
            });
  return map;
}

double directional_overlap(const CorrespondenceMap& map,
                           const PatchGrid& src_grid) {
  return static_cast<double>(map.entries.size()) /
         static_cast<double>(src_grid.patch_count());
}

bool accept_pair(OverlapReport& report, double lo, double hi) {
  if (!(lo >= 0.0 && lo < hi && hi <= 1.0))
    throw ParamError("acceptance band must satisfy 0 <= lo < hi <= 1");
  if (report.reject_reason == RejectReason::too_few_matches ||
      report.reject_reason == RejectReason::no_model) {
    report.accepted = false;
    return false;
  }
  if (report.overlap < lo) {
    report.accepted = false;
    report.reject_reason = RejectReason::too_low;
  } else if (report.overlap > hi) {
    report.accepted = false;
    report.reject_reason = RejectReason::too_high;
  } else {
    report.accepted = true;
    report.reject_reason = RejectReason::none;
  }
  return report.accepted;
}

SymmetricOverlap symmetric_overlap(const Homography& H, const PatchGrid& grid1,
                                   const PatchGrid& grid2,
                                   const OverlapParams& params,
                                   std::uint64_t rng_seed) {
  const Homography Hinv = H.inverse();

  SymmetricOverlap out;
  out.map_12 = correspond_patches(H, grid1, grid2, params.n_points,
                                  Rng::mix(rng_seed, 0));
  out.map_21 = correspond_patches(Hinv, grid2, grid1, params.n_points,
                                  Rng::mix(rng_seed, 1));
  out.report.overlap_12 = directional_overlap(out.map_12, grid1);
  out.report.overlap_21 = directional_overlap(out.map_21, grid2);
  out.report.overlap = std::min(out.report.overlap_12, out.report.overlap_21);
  accept_pair(out.report, params.accept_lo, params.accept_hi);
  return out;
}

}  // namespace pairmine
