#include "pairmine/manifest.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include "pairmine/errors.hpp"

namespace pairmine {
namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json header_to_json(const ManifestHeader& h) {
  ordered_json j;
  j["format_version"] = h.format_version;
  j["patch_size"] = h.patch_size;
  j["grid"] = {{"rows", h.grid_rows}, {"cols", h.grid_cols}};
  j["accept_band"] = {{"lo", round9(h.accept_lo)}, {"hi", round9(h.accept_hi)}};
  j["dataset_seed"] = h.dataset_seed;
  j["created_at"] = h.created_at;
  return j;
}

ordered_json record_to_json(const PairRecord& r) {
  ordered_json j;
  j["pair_id"] = r.pair_id;
  j["source_id"] = r.source_id;
  j["path_a"] = r.path_a;
  j["path_b"] = r.path_b;
  j["overlap_12"] = round9(r.overlap_12);
  j["overlap_21"] = round9(r.overlap_21);
  j["overlap"] = round9(r.overlap);
  ordered_json hom = ordered_json::array();
  for (double v : r.homography) hom.push_back(round9(v));
  j["homography"] = std::move(hom);
  ordered_json corr = ordered_json::array();
  for (const auto& c : r.correspondences)
    corr.push_back(ordered_json::array({c[0], c[1]}));
  j["correspondences"] = std::move(corr);
  j["patch_size"] = r.patch_size;
  j["grid"] = {{"rows", r.grid_rows}, {"cols", r.grid_cols}};
  j["seed"] = r.seed;
  return j;
}

ManifestHeader header_from_json(const ordered_json& j) {
  ManifestHeader h;
  h.format_version = j.at("format_version").get<int>();
  h.patch_size = j.at("patch_size").get<int>();
  h.grid_rows = j.at("grid").at("rows").get<int>();
  h.grid_cols = j.at("grid").at("cols").get<int>();
  h.accept_lo = j.at("accept_band").at("lo").get<double>();
  h.accept_hi = j.at("accept_band").at("hi").get<double>();
  h.dataset_seed = j.at("dataset_seed").get<std::uint64_t>();
  h.created_at = j.at("created_at").get<std::string>();
  return h;
}

PairRecord record_from_json(const ordered_json& j) {
  PairRecord r;
  r.pair_id = j.at("pair_id").get<std::string>();
  r.source_id = j.at("source_id").get<std::string>();
  r.path_a = j.at("path_a").get<std::string>();
  r.path_b = j.at("path_b").get<std::string>();
  r.overlap_12 = j.at("overlap_12").get<double>();
  r.overlap_21 = j.at("overlap_21").get<double>();
  r.overlap = j.at("overlap").get<double>();
  const auto& hom = j.at("homography");
  if (!hom.is_array() || hom.size() != 9)
    throw std::runtime_error("homography must have 9 entries");
  for (int i = 0; i < 9; ++i) r.homography[i] = hom[i].get<double>();
  for (const auto& c : j.at("correspondences")) {
    if (!c.is_array() || c.size() != 2)
      throw std::runtime_error("correspondence entries are [src, dst]");
    r.correspondences.push_back({c[0].get<int>(), c[1].get<int>()});
  }
  r.patch_size = j.at("patch_size").get<int>();
  r.grid_rows = j.at("grid").at("rows").get<int>();
  r.grid_cols = j.at("grid").at("cols").get<int>();
  r.seed = j.at("seed").get<std::uint64_t>();
  return r;
}

void validate_record(const PairRecord& r, const ManifestHeader& h) {
  const auto fail = [&](const std::string& what) {
    throw ValidationError("record '" + r.pair_id + "': " + what);
  };
  if (r.pair_id.empty()) throw ValidationError("record with empty pair_id");
  if (r.patch_size != h.patch_size) fail("patch_size differs from header");
  if (r.grid_rows != h.grid_rows || r.grid_cols != h.grid_cols)
    fail("grid differs from header");
  for (double v : {r.overlap_12, r.overlap_21, r.overlap})
    if (!std::isfinite(v) || v < 0.0 || v > 1.0)
      fail("overlap outside [0, 1]");
  if (r.overlap != std::min(r.overlap_12, r.overlap_21))
    fail("overlap is not the directional minimum");
  if (r.overlap < h.accept_lo || r.overlap > h.accept_hi)
    fail("overlap outside the acceptance band");
  for (double v : r.homography)
    if (!std::isfinite(v)) fail("homography entry not finite");

  const int n_patches = r.grid_rows * r.grid_cols;
  std::set<int> src_seen, dst_seen;
  for (const auto& c : r.correspondences) {
    if (c[0] < 0 || c[0] >= n_patches || c[1] < 0 || c[1] >= n_patches)
      fail("correspondence patch index out of grid bounds");
    if (!src_seen.insert(c[0]).second) fail("duplicate src patch");
    if (!dst_seen.insert(c[1]).second)
      fail("duplicate dst patch (map not injective)");
  }
}

}  // namespace

double round9(double value) {
  if (!std::isfinite(value)) return value;
  char buf[40];
  for (int i = 0; i < 3; ++i) {
    std::snprintf(buf, sizeof(buf), "%.9g", value);
    const double parsed = std::strtod(buf, nullptr);
    if (parsed == value) break;
    value = parsed;
  }
  return value;
}

std::string utc_now_iso8601() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void validate_manifest(const Manifest& manifest) {
  if (manifest.header.format_version != kManifestFormatVersion)
    throw ValidationError("unsupported format_version");
  if (manifest.header.grid_rows < 1 || manifest.header.grid_cols < 1 ||
      manifest.header.patch_size < 1)
    throw ValidationError("header grid/patch_size invalid");
  if (!(manifest.header.accept_lo >= 0 &&
        manifest.header.accept_lo < manifest.header.accept_hi &&
        manifest.header.accept_hi <= 1))
    throw ValidationError("header acceptance band invalid");
  std::set<std::string> ids;
  for (const PairRecord& r : manifest.records) {
    if (!ids.insert(r.pair_id).second)
      throw ValidationError("duplicate pair_id '" + r.pair_id + "'");
    validate_record(r, manifest.header);
  }
}

void write_manifest(const Manifest& manifest, const std::string& path) {
  validate_manifest(manifest);

  std::vector<const PairRecord*> order;
  order.reserve(manifest.records.size());
  for (const PairRecord& r : manifest.records) order.push_back(&r);
  std::sort(order.begin(), order.end(),
            [](const PairRecord* a, const PairRecord* b) {
              return a->pair_id < b->pair_id;
            });

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for write: " + tmp);
    out << header_to_json(manifest.header).dump() << '\n';
    for (const PairRecord* r : order) out << record_to_json(*r).dump() << '\n';
    out.flush();
    if (!out) {
      std::remove(tmp.c_str());
      throw IoError("write failed: " + tmp);
    }
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw IoError("cannot move manifest into place: " + path);
  }
}

Manifest read_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read manifest: " + path);

  Manifest manifest;
  std::string line;
  int line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() && in.eof()) break;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("manifest JSON error: ") + e.what(),
                       line_no);
    }
    try {
      if (!have_header) {
        manifest.header = header_from_json(j);
        if (manifest.header.format_version != kManifestFormatVersion)
          throw VersionError(
              "unsupported manifest format_version " +
              std::to_string(manifest.header.format_version));
        have_header = true;
      } else {
        manifest.records.push_back(record_from_json(j));
      }
    } catch (const VersionError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(std::string("manifest field error: ") + e.what(),
                       line_no);
    }
  }
  if (!have_header)
    throw ParseError("manifest is empty (missing header line)", 1);
  return manifest;
}

Manifest merge_manifests(const std::vector<Manifest>& shards) {
  if (shards.empty()) throw EmptyInput("merge_manifests: no shards");
  Manifest merged;
  merged.header = shards.front().header;
  for (const Manifest& shard : shards) {
    const ManifestHeader& h = shard.header;
    const ManifestHeader& m = merged.header;
    if (h.format_version != m.format_version ||
        h.patch_size != m.patch_size || h.grid_rows != m.grid_rows ||
        h.grid_cols != m.grid_cols || h.accept_lo != m.accept_lo ||
        h.accept_hi != m.accept_hi || h.dataset_seed != m.dataset_seed)
      throw ValidationError("merge_manifests: shard headers disagree");
    merged.records.insert(merged.records.end(), shard.records.begin(),
                          shard.records.end());
  }
  std::sort(merged.records.begin(), merged.records.end(),
            [](const PairRecord& a, const PairRecord& b) {
              return a.pair_id < b.pair_id;
            });
  return merged;
}

StatsReport dataset_stats(const std::vector<PairRecord>& records) {
  StatsReport report;
  report.total_pairs = records.size();
  for (const PairRecord& r : records) {
    ++report.per_source[r.source_id];
    const int ob = std::min(19, static_cast<int>(r.overlap * 20.0));
    ++report.overlap_histogram[ob];
    const double patches =
        static_cast<double>(r.grid_rows) * static_cast<double>(r.grid_cols);
    const double coverage =
        patches > 0
            ? static_cast<double>(r.correspondences.size()) / patches
            : 0.0;
    const int cb = std::min(19, static_cast<int>(coverage * 20.0));
    ++report.coverage_histogram[cb];
  }
  return report;
}

std::string stats_to_json(const StatsReport& report) {
  ordered_json j;
  j["total_pairs"] = report.total_pairs;
  ordered_json per_source = ordered_json::object();
  ordered_json per_source_pct = ordered_json::object();
  for (const auto& [id, count] : report.per_source) {
    per_source[id] = count;
    per_source_pct[id] =
        report.total_pairs
            ? round9(100.0 * static_cast<double>(count) /
                     static_cast<double>(report.total_pairs))
            : 0.0;
  }
  j["per_source"] = std::move(per_source);
  j["per_source_pct"] = std::move(per_source_pct);
  j["overlap_histogram"] = report.overlap_histogram;
  j["coverage_histogram"] = report.coverage_histogram;
  return j.dump();
}

std::string stats_to_table(const StatsReport& report) {
  std::ostringstream out;
  out << "total pairs: " << report.total_pairs << "\n\n";
  std::size_t width = 6;
  for (const auto& [id, count] : report.per_source)
    width = std::max(width, id.size());
  char line[256];
  std::snprintf(line, sizeof(line), "%-*s  %8s  %7s\n",
                static_cast<int>(width), "source", "pairs", "share");
  out << line;
  for (const auto& [id, count] : report.per_source) {
    const double pct = report.total_pairs
                           ? 100.0 * static_cast<double>(count) /
                                 static_cast<double>(report.total_pairs)
                           : 0.0;
    std::snprintf(line, sizeof(line), "%-*s  %8zu  %6.1f%%\n",
                  static_cast<int>(width), id.c_str(), count, pct);
    out << line;
  }
  out << "\noverlap histogram (20 bins over [0,1]):\n";
  for (int b = 0; b < 20; ++b) {
    if (report.overlap_histogram[b] == 0) continue;
    std::snprintf(line, sizeof(line), "  [%.2f,%.2f%c  %zu\n", b / 20.0,
                  (b + 1) / 20.0, b == 19 ? ']' : ')',
                  report.overlap_histogram[b]);
    out << line;
  }
  out << "\ncorrespondence coverage histogram (20 bins over [0,1]):\n";
  for (int b = 0; b < 20; ++b) {
    if (report.coverage_histogram[b] == 0) continue;
    std::snprintf(line, sizeof(line), "  [%.2f,%.2f%c  %zu\n", b / 20.0,
                  (b + 1) / 20.0, b == 19 ? ']' : ')',
                  report.coverage_histogram[b]);
    out << line;
  }
  return out.str();
}

}  // namespace pairmine
