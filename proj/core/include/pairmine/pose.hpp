#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace pairmine {

/// One camera station of an agent walk: a position in meters and eight
/// headings sweeping a full turn in 45-degree increments.
struct PoseStation {
  double x_m = 0.0;
  double y_m = 0.0;
  std::array<double, 8> headings_deg{};
};

/// Agent-walk script for an external renderer: 3 stations x 8 headings =
/// 24 poses at a fixed sensor height. Stations are linked by a turn drawn
/// from {60, 120, 240, 300} degrees and a step of 0.5 to 1.0 meters along
/// the new heading. Headings are degrees counterclockwise from +x, reduced
/// to [0, 360).
struct PoseScript {
  double sensor_height_m = 0.0;
  std::vector<PoseStation> stations;
};

struct PoseScriptParams {
  double sensor_height_lo = 1.0;
  double sensor_height_hi = 1.8;
  int stations = 3;
};

/// Deterministic per seed.
PoseScript generate_pose_script(const PoseScriptParams& params,
                                std::uint64_t seed);

/// JSON object {sensor_height_m, stations: [{x_m, y_m, headings_deg: [8]}]}.
std::string pose_script_to_json(const PoseScript& script);

/// JSON array of `count` scripts on subseeds mix(seed, i).
std::string pose_scripts_to_json(const PoseScriptParams& params,
                                 std::uint64_t seed, int count);

}  // namespace pairmine
