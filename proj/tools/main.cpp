#include <CLI11.hpp>
#include <json.hpp>
#include <unistd.h>

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "pairmine/canonical.hpp"
#include "pairmine/config.hpp"
#include "pairmine/errors.hpp"
#include "pairmine/image_io.hpp"
#include "pairmine/manifest.hpp"
#include "pairmine/mining.hpp"
#include "pairmine/overlay.hpp"
#include "pairmine/pose.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct GlobalFlags {
  std::string config_path;
  std::vector<std::string> sets;
  std::uint64_t seed = 0;
  bool seed_given = false;
  unsigned threads = 0;
  bool threads_given = false;
};

pairmine::RunConfig resolve_config(const GlobalFlags& flags) {
  pairmine::RunConfig cfg;
  std::string path = flags.config_path;
  if (path.empty()) {
    if (const char* env = std::getenv("PAIRMINE_CONFIG")) path = env;
  }
  if (!path.empty()) cfg = pairmine::load_config(path);

  std::map<std::string, std::string> overrides;
  for (const std::string& kv : flags.sets) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos)
      throw pairmine::ParamError("--set expects key=value, got '" + kv + "'");
    overrides[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  pairmine::apply_overrides(cfg, overrides);
  if (flags.seed_given) cfg.dataset_seed = flags.seed;
  if (flags.threads_given) cfg.threads = flags.threads;
  cfg.validate();
  return cfg;
}

bool stdout_is_tty() { return isatty(fileno(stdout)) != 0; }

ordered_json report_to_json(const pairmine::OverlapReport& report) {
  ordered_json j;
  j["overlap_12"] = pairmine::round9(report.overlap_12);
  j["overlap_21"] = pairmine::round9(report.overlap_21);
  j["overlap"] = pairmine::round9(report.overlap);
  j["accepted"] = report.accepted;
  j["reject_reason"] = pairmine::to_string(report.reject_reason);
  return j;
}

int cmd_pair(const GlobalFlags& flags, const std::string& path_a,
             const std::string& path_b, const std::string& overlay_path) {
  const pairmine::RunConfig cfg = resolve_config(flags);
  const pairmine::RasterImage img_a = pairmine::decode_image(path_a);
  const pairmine::RasterImage img_b = pairmine::decode_image(path_b);
  const std::uint64_t seed =
      pairmine::pair_seed(cfg.dataset_seed, "pair", path_a, path_b);
  const pairmine::PairEvaluation ev =
      pairmine::evaluate_pair(img_a, img_b, cfg, seed);
  std::cout << report_to_json(ev.report).dump() << "\n";
  if (ev.record && !overlay_path.empty()) {
    const pairmine::RasterImage canvas =
        pairmine::render_correspondence_overlay(img_a, img_b, *ev.record);
    pairmine::encode_png(canvas, overlay_path);
  }
  return ev.report.accepted ? 0 : 1;
}

std::vector<pairmine::PairSource> load_source_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw pairmine::IoError("cannot read source spec: " + path);
  ordered_json doc;
  try {
    doc = ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw pairmine::ParseError(std::string("source spec: ") + e.what(), 0);
  }
  const ordered_json& arr = doc.is_object() && doc.contains("sources")
                                ? doc.at("sources")
                                : doc;
  if (!arr.is_array())
    throw pairmine::ParamError(
        "source spec must be a JSON array (or {\"sources\": [...]})");

  // Member paths are resolved relative to the spec file's directory.
  const fs::path base = fs::path(path).parent_path();
  const auto resolve = [&](const std::string& ref) {
    const fs::path p(ref);
    return p.is_absolute() ? p.string() : (base / p).string();
  };

  std::vector<pairmine::PairSource> sources;
  std::map<std::string, bool> seen_ids;
  for (const auto& e : arr) {
    pairmine::PairSource s;
    const std::string kind = e.at("kind").get<std::string>();
    s.source_id = e.at("source_id").get<std::string>();
    if (s.source_id.empty())
      throw pairmine::ParamError("source spec: empty source_id");
    if (seen_ids[s.source_id])
      throw pairmine::ParamError("source spec: duplicate source_id '" +
                                 s.source_id + "'");
    seen_ids[s.source_id] = true;

    if (kind == "video") {
      s.kind = pairmine::SourceKind::video;
      for (const auto& m : e.at("members"))
        s.members.push_back(resolve(m.get<std::string>()));
      if (e.contains("interval")) s.interval = e.at("interval").get<int>();
    } else if (kind == "pose_lists") {
      s.kind = pairmine::SourceKind::pose_lists;
      for (const auto& list : e.at("lists")) {
        std::vector<std::string> refs;
        for (const auto& m : list) refs.push_back(resolve(m.get<std::string>()));
        s.lists.push_back(std::move(refs));
      }
    } else if (kind == "target_group") {
      s.kind = pairmine::SourceKind::target_group;
      const auto& members = e.contains("group") ? e.at("group") : e.at("members");
      for (const auto& m : members)
        s.members.push_back(resolve(m.get<std::string>()));
    } else {
      throw pairmine::ParamError("source spec: unknown kind '" + kind + "'");
    }
    sources.push_back(std::move(s));
  }
  return sources;
}

std::string shard_filename(const std::string& source_id) {
  std::string name;
  for (char c : source_id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
    name += ok ? c : '_';
  }
  return name + ".jsonl";
}

int cmd_mine(const GlobalFlags& flags, const std::string& spec_path,
             const std::string& out_dir) {
  const pairmine::RunConfig cfg = resolve_config(flags);
  const std::vector<pairmine::PairSource> sources = load_source_spec(spec_path);

  const fs::path out(out_dir);
  fs::create_directories(out / "shards");

  const std::string created_at =
      cfg.created_at.empty() ? pairmine::utc_now_iso8601() : cfg.created_at;
  const pairmine::ImageLoader loader = pairmine::make_caching_loader();

  std::vector<pairmine::MiningResult> results;
  results.reserve(sources.size());
  for (const pairmine::PairSource& s : sources)
    results.push_back(pairmine::mine_source(s, cfg, loader));

  // One grid per run: taken from the first record of the run; a run with no
  // records uses the 1x1 placeholder (the header grid is vacuous then).
  pairmine::ManifestHeader header;
  header.patch_size = cfg.patch_size;
  header.accept_lo = cfg.accept_lo;
  header.accept_hi = cfg.accept_hi;
  header.dataset_seed = cfg.dataset_seed;
  header.created_at = created_at;
  header.grid_rows = 1;
  header.grid_cols = 1;
  for (const auto& r : results) {
    if (!r.records.empty()) {
      header.grid_rows = r.records.front().grid_rows;
      header.grid_cols = r.records.front().grid_cols;
      break;
    }
  }

  std::size_t accepted = 0;
  std::size_t skipped = 0;
  std::vector<pairmine::Manifest> shards;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    pairmine::Manifest shard;
    shard.header = header;
    shard.records = results[i].records;
    accepted += results[i].records.size();
    skipped += results[i].skips.size();
    pairmine::write_manifest(
        shard, (out / "shards" / shard_filename(sources[i].source_id)).string());
    shards.push_back(std::move(shard));
  }

  {
    std::ofstream skip_log(out / "skips.jsonl", std::ios::binary);
    if (!skip_log)
      throw pairmine::IoError("cannot write skip log in " + out_dir);
    for (const auto& r : results) {
      for (const pairmine::SkipEntry& s : r.skips) {
        ordered_json j;
        j["source_id"] = s.source_id;
        j["candidate"] = s.candidate;
        j["reason"] = s.reason;
        skip_log << j.dump() << "\n";
      }
    }
  }

  pairmine::Manifest merged;
  if (shards.empty()) {
    merged.header = header;
  } else {
    merged = pairmine::merge_manifests(shards);
  }
  const std::string merged_path = (out / "manifest.jsonl").string();
  pairmine::write_manifest(merged, merged_path);

  if (stdout_is_tty()) {
    std::cout << "sources:  " << sources.size() << "\n"
              << "accepted: " << accepted << "\n"
              << "skipped:  " << skipped << "\n"
              << "manifest: " << merged_path << "\n";
  } else {
    ordered_json j;
    j["sources"] = sources.size();
    j["accepted"] = accepted;
    j["skipped"] = skipped;
    j["manifest"] = merged_path;
    std::cout << j.dump() << "\n";
  }
  return 0;
}

int cmd_posescript(const GlobalFlags& flags, const std::string& out_path,
                   int count) {
  const pairmine::RunConfig cfg = resolve_config(flags);
  pairmine::PoseScriptParams params;
  params.sensor_height_lo = cfg.sensor_height_lo;
  params.sensor_height_hi = cfg.sensor_height_hi;
  const std::string json =
      pairmine::pose_scripts_to_json(params, cfg.dataset_seed, count);
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw pairmine::IoError("cannot write: " + out_path);
  out << json;
  if (!out) throw pairmine::IoError("write failed: " + out_path);
  return 0;
}

int cmd_stats(const std::string& manifest_path) {
  const pairmine::Manifest manifest = pairmine::read_manifest(manifest_path);
  const pairmine::StatsReport report = pairmine::dataset_stats(manifest.records);
  if (stdout_is_tty())
    std::cout << pairmine::stats_to_table(report);
  else
    std::cout << pairmine::stats_to_json(report) << "\n";
  return 0;
}

int cmd_viz(const std::string& manifest_path, const std::string& pair_id,
            const std::string& out_path) {
  const pairmine::Manifest manifest = pairmine::read_manifest(manifest_path);
  for (const pairmine::PairRecord& r : manifest.records) {
    if (r.pair_id != pair_id) continue;
    const pairmine::RasterImage img_a = pairmine::decode_image(r.path_a);
    const pairmine::RasterImage img_b = pairmine::decode_image(r.path_b);
    const pairmine::RasterImage canvas =
        pairmine::render_correspondence_overlay(img_a, img_b, r);
    pairmine::encode_png(canvas, out_path);
    return 0;
  }
  throw pairmine::ParamError("pair_id not found in manifest: " + pair_id);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-view image pair mining pipeline"};
  app.require_subcommand(0, 1);

  GlobalFlags flags;
  bool dump_config = false;
  app.add_option("--config", flags.config_path,
                 "key=value config file (default: $PAIRMINE_CONFIG)");
  app.add_option("--set", flags.sets, "config override key=value (repeatable)");
  app.add_flag("--dump-config", dump_config,
               "print the resolved configuration as key=value lines and exit");
  auto* seed_opt =
      app.add_option("--seed", flags.seed, "dataset seed (overrides config)");
  auto* threads_opt =
      app.add_option("--threads", flags.threads, "worker threads (0 = auto)");

  std::string path_a, path_b, overlay_path;
  auto* pair_cmd =
      app.add_subcommand("pair", "evaluate one image pair; exit 0 accepted, "
                                 "1 rejected, 2 error");
  pair_cmd->add_option("path_a", path_a, "first image")->required();
  pair_cmd->add_option("path_b", path_b, "second image")->required();
  pair_cmd->add_option("--overlay", overlay_path,
                       "write the correspondence overlay PNG when accepted");

  std::string spec_path, out_dir;
  auto* mine_cmd = app.add_subcommand(
      "mine", "mine all sources in a spec; writes shards, skip log, and the "
              "merged manifest");
  mine_cmd->add_option("source_spec", spec_path, "source spec JSON")
      ->required();
  mine_cmd->add_option("out_dir", out_dir, "output directory")->required();

  std::string pose_out;
  int pose_count = 1;
  auto* pose_cmd =
      app.add_subcommand("posescript", "emit agent-walk pose scripts as JSON");
  pose_cmd->add_option("out", pose_out, "output JSON path")->required();
  pose_cmd->add_option("--count", pose_count, "number of scripts (>= 1)");

  std::string manifest_path;
  auto* stats_cmd =
      app.add_subcommand("stats", "summarize a manifest (counts, histograms)");
  stats_cmd->add_option("manifest", manifest_path, "manifest JSONL")
      ->required();

  std::string viz_manifest, viz_pair_id, viz_out;
  auto* viz_cmd = app.add_subcommand(
      "viz", "render the correspondence overlay for one manifest record");
  viz_cmd->add_option("manifest", viz_manifest, "manifest JSONL")->required();
  viz_cmd->add_option("pair_id", viz_pair_id, "record to render")->required();
  viz_cmd->add_option("out", viz_out, "output PNG path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  flags.seed_given = seed_opt->count() > 0;
  flags.threads_given = threads_opt->count() > 0;

  try {
    if (dump_config) {
      for (const auto& [k, v] : pairmine::config_to_map(resolve_config(flags)))
        std::cout << k << "=" << v << "\n";
      return 0;
    }
    if (app.get_subcommands().empty()) {
      std::cerr << app.help();
      return 2;
    }
    if (*pair_cmd) return cmd_pair(flags, path_a, path_b, overlay_path);
    if (*mine_cmd) return cmd_mine(flags, spec_path, out_dir);
    if (*pose_cmd) {
      if (pose_count < 1) {
        std::cerr << "error: --count must be >= 1\n";
        return 2;
      }
      return cmd_posescript(flags, pose_out, pose_count);
    }
    if (*stats_cmd) return cmd_stats(manifest_path);
    if (*viz_cmd) return cmd_viz(viz_manifest, viz_pair_id, viz_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
