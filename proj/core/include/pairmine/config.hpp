#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "pairmine/homography.hpp"
#include "pairmine/overlap.hpp"
#include "pairmine/sift.hpp"

namespace pairmine {

/// Run-level pipeline configuration. Every tunable constant of the pipeline
/// lives here so a run is reproducible from (config, dataset_seed) alone.
struct RunConfig {
  int patch_size = 16;
  int n_points = 100;
  double select_lo = 0.50;  // mining-time selection band
  double select_hi = 0.70;
  double accept_lo = 0.50;  // retention band
  double accept_hi = 0.75;
  double ratio = 0.75;
  RansacParams ransac;
  int min_matches = 12;
  SiftParams sift;
  int video_interval = 30;
  double sensor_height_lo = 1.0;  // meters
  double sensor_height_hi = 1.8;
  std::uint64_t dataset_seed = 0;
  unsigned threads = 0;  // 0 = hardware concurrency
  /// Stamped into manifest headers. Pinning it makes reruns byte-identical;
  /// when empty the writer fills in the current UTC time.
  std::string created_at;

  /// Throws ParamError when any band or count is out of range.
  void validate() const;

  OverlapParams overlap_params() const {
    return OverlapParams{n_points, accept_lo, accept_hi};
  }
};

/// Parses a key=value config file ('#' comments, blank lines ignored).
/// Unknown keys throw ParamError naming the key. Throws IoError when the
/// file cannot be read.
RunConfig load_config(const std::string& path);

/// Applies key=value overrides on top of cfg (same keys as the file format).
void apply_overrides(RunConfig& cfg,
                     const std::map<std::string, std::string>& overrides);

/// Keys accepted by load_config/apply_overrides mapped to their current
/// values, used for round-trip tests and --dump-config.
std::map<std::string, std::string> config_to_map(const RunConfig& cfg);

}  // namespace pairmine
