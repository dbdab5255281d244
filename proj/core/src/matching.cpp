#include "pairmine/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "pairmine/errors.hpp"

namespace pairmine {
namespace {

// Canonical metric: squared differences accumulated in double over ascending
// k. The early-exit scan below prunes with prefix sums of this exact series,
// so reported distances and argmin selection are identical to an unpruned
// full scan.
double squared_l2(const Descriptor& a, const Descriptor& b) {
  double acc = 0.0;
  for (int k = 0; k < 128; ++k) {
    const double diff =
        static_cast<double>(a.values[k]) - static_cast<double>(b.values[k]);
    acc += diff * diff;
  }
  return acc;
}

// Same series with early exit: once the prefix reaches `bound`, the final
// value cannot be strictly below it (terms are non-negative), so the
// candidate cannot improve a strictly-less comparison against `bound`.
double squared_l2_bounded(const Descriptor& a, const Descriptor& b,
                          double bound) {
  double acc = 0.0;
  for (int k = 0; k < 128; k += 16) {
    for (int m = k; m < k + 16; ++m) {
      const double diff =
          static_cast<double>(a.values[m]) - static_cast<double>(b.values[m]);
      acc += diff * diff;
    }
    if (acc >= bound) return std::numeric_limits<double>::infinity();
  }
  return acc;
}

}  // namespace

MatchSet match_descriptors(const DescriptorSet& d1, const DescriptorSet& d2,
                           double ratio) {
  if (d1.empty() || d2.empty())
    throw EmptyInput("match_descriptors: empty descriptor set");
  if (!(ratio > 0.0 && ratio <= 1.0))
    throw ParamError("match_descriptors: ratio must be in (0, 1]");

  const std::size_t n1 = d1.size();
  const std::size_t n2 = d2.size();
  const double inf = std::numeric_limits<double>::infinity();

  // Column pass: nearest d1 row for every d2 column (cross-check targets).
  // Ties keep the lowest row index (strict <).
  std::vector<std::size_t> col_best(n2, 0);
  std::vector<double> col_best_d2(n2, inf);
  for (std::size_t i = 0; i < n1; ++i) {
    for (std::size_t j = 0; j < n2; ++j) {
      const double dsq = squared_l2_bounded(d1[i], d2[j], col_best_d2[j]);
      if (dsq < col_best_d2[j]) {
        col_best_d2[j] = dsq;
        col_best[j] = i;
      }
    }
  }

  MatchSet matches;
  for (std::size_t i = 0; i < n1; ++i) {
    std::size_t best_j = 0;
    double best = inf;
    double second = inf;
    for (std::size_t j = 0; j < n2; ++j) {
      const double dsq = squared_l2_bounded(d1[i], d2[j], second);
      if (dsq < best) {
        second = best;
        best = dsq;
        best_j = j;
      } else if (dsq < second) {
        second = dsq;
      }
    }
    if (best == inf) continue;
    // Lowe ratio on root distances; a lone candidate passes trivially.
    if (second != inf &&
        !(std::sqrt(best) < ratio * std::sqrt(second)))
      continue;
    if (col_best[best_j] != i) continue;  // not mutual

    Match m;
    m.src_idx = i;
    m.dst_idx = best_j;
    m.distance = std::sqrt(squared_l2(d1[i], d2[best_j]));
    matches.push_back(m);
  }

  std::sort(matches.begin(), matches.end(), [](const Match& a, const Match& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    if (a.src_idx != b.src_idx) return a.src_idx < b.src_idx;
    return a.dst_idx < b.dst_idx;
  });
  return matches;
}

}  // namespace pairmine
