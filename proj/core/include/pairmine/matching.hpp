#pragma once

#include <cstddef>
#include <vector>

#include "pairmine/sift.hpp"

namespace pairmine {

struct Match {
  std::size_t src_idx = 0;
  std::size_t dst_idx = 0;
  double distance = 0.0;
};

using MatchSet = std::vector<Match>;

/// Exhaustive L2 matching from d1 to d2 with Lowe's ratio test
/// (nearest/second-nearest < ratio) followed by a mutual cross-check.
/// Each src index appears at most once and matches are mutual nearest
/// neighbors. Output is sorted by (distance, src_idx, dst_idx); nearest
/// neighbor ties resolve to the lowest index. Throws EmptyInput when either
/// set is empty.
MatchSet match_descriptors(const DescriptorSet& d1, const DescriptorSet& d2,
                           double ratio);

}  // namespace pairmine
