#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pairmine/canonical.hpp"
#include "pairmine/mining.hpp"

namespace pairmine {

inline constexpr int kManifestFormatVersion = 1;

struct ManifestHeader {
  int format_version = kManifestFormatVersion;
  int patch_size = 16;
  int grid_rows = 0;
  int grid_cols = 0;
  double accept_lo = 0.50;
  double accept_hi = 0.75;
  std::uint64_t dataset_seed = 0;
  std::string created_at;  // ISO-8601 UTC
};

struct Manifest {
  ManifestHeader header;
  std::vector<PairRecord> records;
};

/// Canonical JSONL: line 1 is the header object, then one record per line
/// sorted by pair_id. Validates first (unique pair_ids, header/record grid
/// agreement, injective correspondences, overlap inside the header band) and
/// writes atomically via a temp file, so failures leave no partial output.
/// Throws ValidationError and IoError.
void write_manifest(const Manifest& manifest, const std::string& path);

/// Inverse of write_manifest. Throws ParseError with the 1-based line
/// number, VersionError for an unsupported format_version, IoError.
Manifest read_manifest(const std::string& path);

/// Validation shared by writer and tests; throws ValidationError.
void validate_manifest(const Manifest& manifest);

/// Concatenates shard records under the first header and re-sorts by
/// pair_id. Headers must agree on everything except created_at.
Manifest merge_manifests(const std::vector<Manifest>& shards);

struct StatsReport {
  std::size_t total_pairs = 0;
  std::map<std::string, std::size_t> per_source;      // source_id -> count
  std::array<std::size_t, 20> overlap_histogram{};    // bins over [0,1]
  std::array<std::size_t, 20> coverage_histogram{};   // |corr| / patch_count
};

StatsReport dataset_stats(const std::vector<PairRecord>& records);

/// Stats as a JSON object.
std::string stats_to_json(const StatsReport& report);

/// Stats as an aligned-column text table.
std::string stats_to_table(const StatsReport& report);

}  // namespace pairmine
