#include "pairmine/config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "pairmine/errors.hpp"

namespace pairmine {
namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

long long parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ParamError("config: '" + key + "' expects an integer, got '" +
                     value + "'");
  }
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ParamError("config: '" + key + "' expects a number, got '" + value +
                     "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ParamError("config: '" + key + "' expects an unsigned integer, got '" +
                     value + "'");
  }
}

void set_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "patch_size") cfg.patch_size = static_cast<int>(parse_int(key, value));
  else if (key == "n_points") cfg.n_points = static_cast<int>(parse_int(key, value));
  else if (key == "select_lo") cfg.select_lo = parse_double(key, value);
  else if (key == "select_hi") cfg.select_hi = parse_double(key, value);
  else if (key == "accept_lo") cfg.accept_lo = parse_double(key, value);
  else if (key == "accept_hi") cfg.accept_hi = parse_double(key, value);
  else if (key == "ratio") cfg.ratio = parse_double(key, value);
  else if (key == "ransac_threshold") cfg.ransac.threshold = parse_double(key, value);
  else if (key == "ransac_max_iters") cfg.ransac.max_iters = static_cast<int>(parse_int(key, value));
  else if (key == "ransac_confidence") cfg.ransac.confidence = parse_double(key, value);
  else if (key == "min_matches") cfg.min_matches = static_cast<int>(parse_int(key, value));
  else if (key == "keypoint_cap") cfg.sift.keypoint_cap = static_cast<std::size_t>(parse_int(key, value));
  else if (key == "contrast_threshold") cfg.sift.contrast_threshold = parse_double(key, value);
  else if (key == "edge_ratio") cfg.sift.edge_ratio = parse_double(key, value);
  else if (key == "base_sigma") cfg.sift.base_sigma = parse_double(key, value);
  else if (key == "intervals") cfg.sift.intervals = static_cast<int>(parse_int(key, value));
  else if (key == "video_interval") cfg.video_interval = static_cast<int>(parse_int(key, value));
  else if (key == "sensor_height_lo") cfg.sensor_height_lo = parse_double(key, value);
  else if (key == "sensor_height_hi") cfg.sensor_height_hi = parse_double(key, value);
  else if (key == "dataset_seed") cfg.dataset_seed = parse_u64(key, value);
  else if (key == "threads") cfg.threads = static_cast<unsigned>(parse_int(key, value));
  else if (key == "created_at") cfg.created_at = value;
  else throw ParamError("config: unknown key '" + key + "'");
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace

void RunConfig::validate() const {
  if (patch_size < 1) throw ParamError("config: patch_size must be >= 1");
  if (n_points < 1) throw ParamError("config: n_points must be >= 1");
  if (!(select_lo >= 0 && select_lo < select_hi && select_hi <= 1))
    throw ParamError("config: selection band must satisfy 0 <= lo < hi <= 1");
  if (!(accept_lo >= 0 && accept_lo < accept_hi && accept_hi <= 1))
    throw ParamError("config: acceptance band must satisfy 0 <= lo < hi <= 1");
  if (!(ratio > 0 && ratio <= 1))
    throw ParamError("config: ratio must be in (0, 1]");
  if (!(ransac.threshold > 0))
    throw ParamError("config: ransac_threshold must be > 0");
  if (ransac.max_iters < 1)
    throw ParamError("config: ransac_max_iters must be >= 1");
  if (!(ransac.confidence > 0 && ransac.confidence < 1))
    throw ParamError("config: ransac_confidence must be in (0, 1)");
  if (min_matches < 4)
    throw ParamError("config: min_matches must be >= 4");
  if (video_interval < 1)
    throw ParamError("config: video_interval must be >= 1");
  if (!(sensor_height_lo > 0 && sensor_height_lo <= sensor_height_hi))
    throw ParamError("config: sensor height range invalid");
  if (sift.keypoint_cap < 1)
    throw ParamError("config: keypoint_cap must be >= 1");
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config: " + path);
  RunConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ParamError("config: line " + std::to_string(line_no) +
                       " is not key=value");
    set_key(cfg, trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
  }
  cfg.validate();
  return cfg;
}

void apply_overrides(RunConfig& cfg,
                     const std::map<std::string, std::string>& overrides) {
  for (const auto& [key, value] : overrides) set_key(cfg, key, value);
}

std::map<std::string, std::string> config_to_map(const RunConfig& cfg) {
  std::map<std::string, std::string> m;
  m["patch_size"] = std::to_string(cfg.patch_size);
  m["n_points"] = std::to_string(cfg.n_points);
  m["select_lo"] = fmt_double(cfg.select_lo);
  m["select_hi"] = fmt_double(cfg.select_hi);
  m["accept_lo"] = fmt_double(cfg.accept_lo);
  m["accept_hi"] = fmt_double(cfg.accept_hi);
  m["ratio"] = fmt_double(cfg.ratio);
  m["ransac_threshold"] = fmt_double(cfg.ransac.threshold);
  m["ransac_max_iters"] = std::to_string(cfg.ransac.max_iters);
  m["ransac_confidence"] = fmt_double(cfg.ransac.confidence);
  m["min_matches"] = std::to_string(cfg.min_matches);
  m["keypoint_cap"] = std::to_string(cfg.sift.keypoint_cap);
  m["contrast_threshold"] = fmt_double(cfg.sift.contrast_threshold);
  m["edge_ratio"] = fmt_double(cfg.sift.edge_ratio);
  m["base_sigma"] = fmt_double(cfg.sift.base_sigma);
  m["intervals"] = std::to_string(cfg.sift.intervals);
  m["video_interval"] = std::to_string(cfg.video_interval);
  m["sensor_height_lo"] = fmt_double(cfg.sensor_height_lo);
  m["sensor_height_hi"] = fmt_double(cfg.sensor_height_hi);
  m["dataset_seed"] = std::to_string(cfg.dataset_seed);
  m["threads"] = std::to_string(cfg.threads);
  m["created_at"] = cfg.created_at;
  return m;
}

}  // namespace pairmine
