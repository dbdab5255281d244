#include "pairmine/pose.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "pairmine/canonical.hpp"
#include "pairmine/errors.hpp"
#include "pairmine/rng.hpp"

namespace pairmine {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

double wrap_deg(double deg) {
  double w = std::fmod(deg, 360.0);
  if (w < 0) w += 360.0;
  return w;
}

void append_station(PoseScript& script, double x, double y, double heading) {
  PoseStation st;
  st.x_m = x;
  st.y_m = y;
  for (int i = 0; i < 8; ++i)
    st.headings_deg[i] = wrap_deg(heading + 45.0 * i);
  script.stations.push_back(st);
}

std::string json_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", round9(v));
  return buf;
}

}  // namespace

PoseScript generate_pose_script(const PoseScriptParams& params,
                                std::uint64_t seed) {
  if (params.stations < 1)
    throw ParamError("generate_pose_script: stations must be >= 1");
  if (!(params.sensor_height_lo > 0 &&
        params.sensor_height_lo <= params.sensor_height_hi))
    throw ParamError("generate_pose_script: sensor height range invalid");

  Rng rng(seed);
  PoseScript script;
  script.sensor_height_m =
      rng.next_in(params.sensor_height_lo, params.sensor_height_hi);

  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  append_station(script, x, y, heading);

  // Turns are multiples of 60 degrees minus about-faces and full turns.
  static constexpr double kTurns[4] = {60.0, 120.0, 240.0, 300.0};
  for (int s = 1; s < params.stations; ++s) {
    const double turn = kTurns[rng.next_below(4)];
    const double step = rng.next_in(0.5, 1.0);
    heading = wrap_deg(heading + turn);
    x += step * std::cos(heading * kDegToRad);
    y += step * std::sin(heading * kDegToRad);
    append_station(script, x, y, heading);
  }
  return script;
}

std::string pose_script_to_json(const PoseScript& script) {
  std::string out = "{\"sensor_height_m\":" + json_number(script.sensor_height_m);
  out += ",\"stations\":[";
  for (std::size_t s = 0; s < script.stations.size(); ++s) {
    const PoseStation& st = script.stations[s];
    if (s) out += ",";
    out += "{\"x_m\":" + json_number(st.x_m);
    out += ",\"y_m\":" + json_number(st.y_m);
    out += ",\"headings_deg\":[";
    for (int i = 0; i < 8; ++i) {
      if (i) out += ",";
      out += json_number(st.headings_deg[i]);
    }
    out += "]}";
  }
  out += "]}";
  return out;
}

std::string pose_scripts_to_json(const PoseScriptParams& params,
                                 std::uint64_t seed, int count) {
  if (count < 1) throw ParamError("pose_scripts_to_json: count must be >= 1");
  std::string out = "[";
  for (int i = 0; i < count; ++i) {
    if (i) out += ",\n ";
    out += pose_script_to_json(
        generate_pose_script(params, Rng::mix(seed, i)));
  }
  out += "]\n";
  return out;
}

}  // namespace pairmine
