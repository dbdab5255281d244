#include "pairmine/mining.hpp"

#include <algorithm>
#include <cstdio>
#include <memory>
#include <mutex>
#include <unordered_map>

#include "pairmine/canonical.hpp"
#include "pairmine/errors.hpp"
#include "pairmine/image_io.hpp"
#include "pairmine/manifest.hpp"
#include "pairmine/matching.hpp"
#include "pairmine/parallel.hpp"
#include "pairmine/rng.hpp"

namespace pairmine {
namespace {

std::string pad6(std::size_t v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06zu", v);
  return buf;
}

std::string make_pair_id(const std::string& source_id, std::size_t idx_a,
                         std::size_t idx_b) {
  return source_id + ":" + pad6(idx_a) + "-" + pad6(idx_b);
}

struct CandidateResult {
  bool failed = false;         // load/shape failure, not a rejection
  std::string failure_reason;  // "decode_error" or "dimension_error"
  PairEvaluation eval;
};

CandidateResult evaluate_candidate(const std::string& ref_a,
                                   const std::string& ref_b,
                                   const std::string& source_id,
                                   const RunConfig& cfg,
                                   const ImageLoader& load) {
  CandidateResult out;
  try {
    const RasterImage img_a = load(ref_a);
    const RasterImage img_b = load(ref_b);
    const std::uint64_t seed =
        pair_seed(cfg.dataset_seed, source_id, ref_a, ref_b);
    out.eval = evaluate_pair(img_a, img_b, cfg, seed);
  } catch (const DecodeError&) {
    out.failed = true;
    out.failure_reason = "decode_error";
  } catch (const DimensionError&) {
    out.failed = true;
    out.failure_reason = "dimension_error";
  }
  return out;
}

struct Candidate {
  std::size_t idx_a = 0;  // member indices, for pair ids and tie-breaks
  std::size_t idx_b = 0;
  std::string ref_a;
  std::string ref_b;
};

std::vector<CandidateResult> evaluate_all(const std::vector<Candidate>& cands,
                                          const std::string& source_id,
                                          const RunConfig& cfg,
                                          const ImageLoader& load) {
  std::vector<CandidateResult> results(cands.size());
  const unsigned threads =
      cfg.threads == 0 ? default_thread_count() : cfg.threads;
  parallel_for(cands.size(), threads, [&](std::size_t i) {
    results[i] =
        evaluate_candidate(cands[i].ref_a, cands[i].ref_b, source_id, cfg, load);
  });
  return results;
}

PairRecord finalize_record(PairRecord record, const std::string& source_id,
                           const Candidate& cand) {
  record.pair_id = make_pair_id(source_id, cand.idx_a, cand.idx_b);
  record.source_id = source_id;
  record.path_a = cand.ref_a;
  record.path_b = cand.ref_b;
  return record;
}

std::string candidate_label(const Candidate& cand) {
  return cand.ref_a + "+" + cand.ref_b;
}

/// Shared by pose-list and target-group mining: the in-selection-band
/// candidate with minimal overlap wins; ties break to the earlier candidate
/// in the given order. Load failures land in the skip log.
MiningResult select_minimal_in_band(const std::vector<Candidate>& cands,
                                    const std::string& source_id,
                                    const RunConfig& cfg,
                                    const ImageLoader& load) {
  const std::vector<CandidateResult> results =
      evaluate_all(cands, source_id, cfg, load);

  MiningResult out;
  std::size_t best = cands.size();
  for (std::size_t i = 0; i < cands.size(); ++i) {
    const CandidateResult& r = results[i];
    if (r.failed) {
      out.skips.push_back(
          {source_id, candidate_label(cands[i]), r.failure_reason});
      continue;
    }
    if (!r.eval.record) continue;
    const double ov = r.eval.report.overlap;
    if (ov < cfg.select_lo || ov > cfg.select_hi) continue;
    if (best == cands.size() ||
        ov < results[best].eval.report.overlap)
      best = i;
  }
  if (best != cands.size())
    out.records.push_back(
        finalize_record(*results[best].eval.record, source_id, cands[best]));
  return out;
}

}  // namespace

const char* to_string(SourceKind kind) {
  switch (kind) {
    case SourceKind::video: return "video";
    case SourceKind::pose_lists: return "pose_lists";
    case SourceKind::target_group: return "target_group";
  }
  return "unknown";
}

std::uint64_t pair_seed(std::uint64_t dataset_seed,
                        const std::string& source_id, const std::string& ref_a,
                        const std::string& ref_b) {
  std::uint64_t h = Rng::hash_str(dataset_seed, source_id);
  h = Rng::hash_str(h, ref_a);
  return Rng::hash_str(h, ref_b);
}

ImageLoader make_caching_loader() {
  struct Cache {
    std::mutex mu;
    std::unordered_map<std::string, RasterImage> images;
  };
  auto cache = std::make_shared<Cache>();
  return [cache](const std::string& ref) {
    std::lock_guard<std::mutex> lock(cache->mu);
    auto it = cache->images.find(ref);
    if (it == cache->images.end())
      it = cache->images.emplace(ref, decode_image(ref)).first;
    return it->second;
  };
}

PairEvaluation evaluate_pair(const RasterImage& img_a, const RasterImage& img_b,
                             const RunConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  if (std::min(img_a.width, img_a.height) < 64 ||
      std::min(img_b.width, img_b.height) < 64)
    throw DimensionError("evaluate_pair: images must be at least 64 px a side");
  if (img_a.width != img_b.width || img_a.height != img_b.height)
    throw DimensionError(
        "evaluate_pair: views must share dimensions (one manifest grid)");

  PairEvaluation ev;

  const RasterImage gray_a = to_gray(img_a);
  const RasterImage gray_b = to_gray(img_b);
  const DescribedSet a =
      compute_descriptors(gray_a, detect_keypoints(gray_a, cfg.sift), cfg.sift);
  const DescribedSet b =
      compute_descriptors(gray_b, detect_keypoints(gray_b, cfg.sift), cfg.sift);

  const int need = std::max(cfg.min_matches, 4);
  if (a.descriptors.empty() || b.descriptors.empty() ||
      static_cast<int>(std::min(a.descriptors.size(), b.descriptors.size())) <
          need) {
    ev.report.reject_reason = RejectReason::too_few_matches;
    return ev;
  }

  const MatchSet matches =
      match_descriptors(a.descriptors, b.descriptors, cfg.ratio);
  if (static_cast<int>(matches.size()) < need) {
    ev.report.reject_reason = RejectReason::too_few_matches;
    return ev;
  }

  RansacResult ransac;
  try {
    ransac = ransac_homography(matches, a.keypoints, b.keypoints, cfg.ransac,
                               Rng::hash_str(seed, "ransac"));
  } catch (const NoModelFound&) {
    ev.report.reject_reason = RejectReason::no_model;
    return ev;
  }

  const PatchGrid grid1 =
      PatchGrid::make(img_a.width, img_a.height, cfg.patch_size);
  const PatchGrid grid2 =
      PatchGrid::make(img_b.width, img_b.height, cfg.patch_size);
  const SymmetricOverlap sym =
      symmetric_overlap(ransac.homography, grid1, grid2, cfg.overlap_params(),
                        Rng::hash_str(seed, "overlap"));
  ev.report = sym.report;
  if (!ev.report.accepted) return ev;

  PairRecord record;
  record.overlap_12 = round9(ev.report.overlap_12);
  record.overlap_21 = round9(ev.report.overlap_21);
  record.overlap = round9(ev.report.overlap);
  for (int i = 0; i < 9; ++i)
    record.homography[i] = round9(ransac.homography.h[i]);
  record.correspondences.reserve(sym.map_12.entries.size());
  for (const CorrespondenceEntry& e : sym.map_12.entries)
    record.correspondences.push_back({e.src_patch, e.dst_patch});
  record.patch_size = cfg.patch_size;
  record.grid_rows = grid1.rows;
  record.grid_cols = grid1.cols;
  record.seed = seed;
  ev.record = std::move(record);
  return ev;
}

MiningResult mine_video(const PairSource& source, const RunConfig& cfg,
                        const ImageLoader& load) {
  const int interval =
      source.interval > 0 ? source.interval : cfg.video_interval;
  if (interval < 1) throw ParamError("mine_video: interval must be >= 1");

  std::vector<std::size_t> sub;  // original member indices, every `interval`
  for (std::size_t i = 0; i < source.members.size();
       i += static_cast<std::size_t>(interval))
    sub.push_back(i);

  MiningResult out;
  if (sub.size() < 2) return out;

  auto candidate = [&](std::size_t si, std::size_t sj) {
    return Candidate{sub[si], sub[sj], source.members[sub[si]],
                     source.members[sub[sj]]};
  };

  // Primary pass: consecutive subsampled pairs.
  std::vector<Candidate> primaries;
  for (std::size_t i = 0; i + 1 < sub.size(); ++i)
    primaries.push_back(candidate(i, i + 1));
  const std::vector<CandidateResult> primary_results =
      evaluate_all(primaries, source.source_id, cfg, load);

  // Fallback pass, only where the primary was rejected too_high.
  std::vector<Candidate> fallbacks;
  std::vector<std::size_t> fallback_of(primaries.size(), SIZE_MAX);
  for (std::size_t i = 0; i + 1 < sub.size(); ++i) {
    const CandidateResult& r = primary_results[i];
    if (!r.failed && !r.eval.record &&
        r.eval.report.reject_reason == RejectReason::too_high &&
        i + 2 < sub.size()) {
      fallback_of[i] = fallbacks.size();
      fallbacks.push_back(candidate(i, i + 2));
    }
  }
  const std::vector<CandidateResult> fallback_results =
      evaluate_all(fallbacks, source.source_id, cfg, load);

  for (std::size_t i = 0; i < primaries.size(); ++i) {
    const CandidateResult& r = primary_results[i];
    if (r.failed) {
      out.skips.push_back(
          {source.source_id, candidate_label(primaries[i]), r.failure_reason});
      continue;
    }
    if (r.eval.record) {
      out.records.push_back(
          finalize_record(*r.eval.record, source.source_id, primaries[i]));
      continue;
    }
    out.skips.push_back({source.source_id, candidate_label(primaries[i]),
                         to_string(r.eval.report.reject_reason)});
    if (fallback_of[i] == SIZE_MAX) continue;
    const Candidate& fc = fallbacks[fallback_of[i]];
    const CandidateResult& fr = fallback_results[fallback_of[i]];
    if (fr.failed) {
      out.skips.push_back(
          {source.source_id, candidate_label(fc), fr.failure_reason});
    } else if (fr.eval.record) {
      out.records.push_back(
          finalize_record(*fr.eval.record, source.source_id, fc));
    } else {
      out.skips.push_back({source.source_id, candidate_label(fc),
                           to_string(fr.eval.report.reject_reason)});
    }
  }
  return out;
}

MiningResult mine_pose_lists(const PairSource& source, const RunConfig& cfg,
                             const ImageLoader& load) {
  if (source.lists.size() != 3)
    throw ParamError("mine_pose_lists: need exactly 3 lists");
  for (const auto& list : source.lists)
    if (list.size() != 8)
      throw ParamError("mine_pose_lists: each list must have 8 members");

  // Candidates: list1 x (list2 + list3). Flattened member indexing is
  // 0..7 = list1, 8..15 = list2, 16..23 = list3.
  std::vector<Candidate> cands;
  cands.reserve(8 * 16);
  for (std::size_t a = 0; a < 8; ++a)
    for (std::size_t b = 0; b < 16; ++b) {
      const auto& list = source.lists[1 + b / 8];
      cands.push_back(
          {a, 8 + b, source.lists[0][a], list[b % 8]});
    }
  return select_minimal_in_band(cands, source.source_id, cfg, load);
}

MiningResult mine_target_group(const PairSource& source, const RunConfig& cfg,
                               const ImageLoader& load) {
  if (source.members.size() < 2)
    throw ParamError("mine_target_group: need >= 2 members");
  std::vector<Candidate> cands;
  for (std::size_t i = 0; i < source.members.size(); ++i)
    for (std::size_t j = i + 1; j < source.members.size(); ++j)
      cands.push_back({i, j, source.members[i], source.members[j]});
  return select_minimal_in_band(cands, source.source_id, cfg, load);
}

MiningResult mine_source(const PairSource& source, const RunConfig& cfg,
                         const ImageLoader& load) {
  if (source.source_id.empty())
    throw ParamError("mine_source: source_id must be non-empty");
  switch (source.kind) {
    case SourceKind::video:
      return mine_video(source, cfg, load);
    case SourceKind::pose_lists:
      return mine_pose_lists(source, cfg, load);
    case SourceKind::target_group:
      return mine_target_group(source, cfg, load);
  }
  throw ParamError("mine_source: unknown source kind");
}

}  // namespace pairmine
