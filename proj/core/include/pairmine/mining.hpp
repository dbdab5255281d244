#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pairmine/config.hpp"
#include "pairmine/image.hpp"
#include "pairmine/overlap.hpp"

namespace pairmine {

enum class SourceKind { video, pose_lists, target_group };

const char* to_string(SourceKind kind);

/// One mining work unit. Video and target-group sources list their images in
/// `members`; pose-list sources carry three rendered lists of 8 views each in
/// `lists`.
struct PairSource {
  SourceKind kind = SourceKind::video;
  std::string source_id;
  std::vector<std::string> members;
  std::vector<std::vector<std::string>> lists;
  int interval = 0;  // video only; 0 = use config default
};

/// An accepted pair with its full correspondence metadata.
struct PairRecord {
  std::string pair_id;
  std::string source_id;
  std::string path_a;
  std::string path_b;
  double overlap_12 = 0.0;
  double overlap_21 = 0.0;
  double overlap = 0.0;
  std::array<double, 9> homography{1, 0, 0, 0, 1, 0, 0, 0, 1};
  std::vector<std::array<int, 2>> correspondences;  // (src_patch, dst_patch)
  int patch_size = 16;
  int grid_rows = 0;
  int grid_cols = 0;
  std::uint64_t seed = 0;
};

struct PairEvaluation {
  OverlapReport report;
  /// Present iff report.accepted; pair_id/source_id/paths left for the caller.
  std::optional<PairRecord> record;
};

/// Full per-pair pipeline: grayscale, detect, describe, match, RANSAC,
/// symmetric overlap, acceptance. Geometric failures become reject reasons
/// (too few matches and RANSAC failure both reject rather than throw).
/// Throws DimensionError when either side of either image is below 64.
PairEvaluation evaluate_pair(const RasterImage& img_a, const RasterImage& img_b,
                             const RunConfig& cfg, std::uint64_t seed);

struct SkipEntry {
  std::string source_id;
  std::string candidate;  // "ref_a+ref_b"
  std::string reason;
};

struct MiningResult {
  std::vector<PairRecord> records;
  std::vector<SkipEntry> skips;
};

/// Resolves an image reference from a source spec to pixels. Mining calls it
/// once per reference per candidate; wrap it in an ImageCache to avoid
/// repeated decodes.
using ImageLoader = std::function<RasterImage(const std::string& ref)>;

/// Memoizing loader over decode_image; safe for concurrent use.
ImageLoader make_caching_loader();

/// Per-pair seed: stable in (dataset_seed, source_id, ref_a, ref_b) so
/// reruns and different schedules reproduce identical records.
std::uint64_t pair_seed(std::uint64_t dataset_seed,
                        const std::string& source_id, const std::string& ref_a,
                        const std::string& ref_b);

/// Video mining: subsample every `interval` frames, evaluate consecutive
/// subsampled pairs, and when a pair is rejected too_high retry with the
/// next subsampled frame. Each left frame yields at most one record.
/// Rejected evaluations and decode failures land in the skip log.
MiningResult mine_video(const PairSource& source, const RunConfig& cfg,
                        const ImageLoader& load);

/// Pose-list mining: evaluates all (list1 x (list2 + list3)) candidates and
/// keeps the in-selection-band pair with minimal overlap (ties break to the
/// lexicographically first candidate index). Result has 0 or 1 records.
MiningResult mine_pose_lists(const PairSource& source, const RunConfig& cfg,
                             const ImageLoader& load);

/// Target-group mining: same selection rule over all unordered member pairs.
MiningResult mine_target_group(const PairSource& source, const RunConfig& cfg,
                               const ImageLoader& load);

/// Dispatches on source.kind after validating the source shape.
MiningResult mine_source(const PairSource& source, const RunConfig& cfg,
                         const ImageLoader& load);

}  // namespace pairmine
