#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "pairmine/matching.hpp"
#include "pairmine/sift.hpp"

namespace pairmine {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Row-major 3x3 projective map, normalized so h[8] = 1 whenever
/// |h[8]| > 1e-12 and to unit Frobenius norm otherwise.
struct Homography {
  std::array<double, 9> h{1, 0, 0, 0, 1, 0, 0, 0, 1};

  static Homography identity() { return Homography{}; }
  static Homography translation(double tx, double ty);
  static Homography scale(double sx, double sy);

  /// Canonical normalization described above. Throws DegenerateConfiguration
  /// for the zero matrix.
  Homography normalized() const;

  /// Matrix inverse with the same normalization. Throws
  /// DegenerateConfiguration when |det| <= 1e-12.
  Homography inverse() const;

  double det() const;
};

/// Maps p through H. Throws ProjectiveDegenerate when the homogeneous
/// weight |w| < 1e-12 (point at infinity).
Point2 apply_homography(const Homography& H, Point2 p);

/// Normalized DLT fit (Hartley normalization, SVD null vector,
/// denormalization). Requires >= 4 point pairs; throws
/// DegenerateConfiguration for rank-deficient configurations such as
/// collinear minimal samples.
Homography estimate_homography_dlt(const std::vector<Point2>& pts1,
                                   const std::vector<Point2>& pts2);

struct RansacResult {
  Homography homography;
  std::vector<bool> inlier_mask;
  int iterations_run = 0;
  double inlier_rmse = 0.0;
};

struct RansacParams {
  double threshold = 3.0;   // px, symmetric reprojection error
  int max_iters = 2000;
  double confidence = 0.999;
};

/// Seeded RANSAC over match point pairs: 4-point DLT hypotheses, symmetric
/// reprojection scoring (max of forward and backward error), adaptive
/// termination, then a final DLT refit on the best inlier set with the mask
/// recomputed under the refit model. Deterministic given the seed.
/// Throws InsufficientMatches (< 4 matches) and NoModelFound (no hypothesis
/// reached 4 inliers).
RansacResult ransac_homography(const MatchSet& matches, const KeypointSet& kps1,
                               const KeypointSet& kps2,
                               const RansacParams& params,
                               std::uint64_t rng_seed);

}  // namespace pairmine
