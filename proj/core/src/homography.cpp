#include "pairmine/homography.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "pairmine/errors.hpp"
#include "pairmine/rng.hpp"

namespace pairmine {
namespace {

constexpr double kWeightEps = 1e-12;

Homography from_matrix(const Eigen::Matrix3d& m) {
  Homography H;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) H.h[r * 3 + c] = m(r, c);
  return H.normalized();
}

Eigen::Matrix3d to_matrix(const Homography& H) {
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = H.h[r * 3 + c];
  return m;
}

struct NormXform {
  // Similarity carrying raw points to centroid 0, mean distance sqrt(2).
  double scale = 1.0;
  double cx = 0.0;
  double cy = 0.0;

  Eigen::Matrix3d matrix() const {
    Eigen::Matrix3d t;
    t << scale, 0, -scale * cx, 0, scale, -scale * cy, 0, 0, 1;
    return t;
  }
};

NormXform hartley_normalization(const std::vector<Point2>& pts) {
  NormXform n;
  for (const Point2& p : pts) {
    n.cx += p.x;
    n.cy += p.y;
  }
  n.cx /= static_cast<double>(pts.size());
  n.cy /= static_cast<double>(pts.size());
  double mean_dist = 0.0;
  for (const Point2& p : pts)
    mean_dist += std::hypot(p.x - n.cx, p.y - n.cy);
  mean_dist /= static_cast<double>(pts.size());
  if (mean_dist < 1e-12)
    throw DegenerateConfiguration("all points coincide");
  n.scale = std::numbers::sqrt2 / mean_dist;
  return n;
}

double symmetric_error(const Homography& H, const Homography& Hinv, Point2 p1,
                       Point2 p2) {
  const Point2 f = apply_homography(H, p1);
  const Point2 b = apply_homography(Hinv, p2);
  const double fwd = std::hypot(f.x - p2.x, f.y - p2.y);
  const double bwd = std::hypot(b.x - p1.x, b.y - p1.y);
  return std::max(fwd, bwd);
}

bool three_collinear(const Point2& a, const Point2& b, const Point2& c) {
  const double area2 =
      (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
  return std::abs(area2) < 1e-9;
}

bool sample_degenerate(const std::array<Point2, 4>& p) {
  for (int skip = 0; skip < 4; ++skip) {
    std::array<Point2, 3> t;
    int m = 0;
    for (int i = 0; i < 4; ++i)
      if (i != skip) t[m++] = p[i];
    if (three_collinear(t[0], t[1], t[2])) return true;
  }
  return false;
}

}  // namespace

Homography Homography::translation(double tx, double ty) {
  Homography H;
  H.h = {1, 0, tx, 0, 1, ty, 0, 0, 1};
  return H;
}

Homography Homography::scale(double sx, double sy) {
  Homography H;
  H.h = {sx, 0, 0, 0, sy, 0, 0, 0, 1};
  return H;
}

double Homography::det() const {
  return h[0] * (h[4] * h[8] - h[5] * h[7]) -
         h[1] * (h[3] * h[8] - h[5] * h[6]) +
         h[2] * (h[3] * h[7] - h[4] * h[6]);
}

Homography Homography::normalized() const {
  Homography out = *this;
  if (std::abs(out.h[8]) > kWeightEps) {
    const double inv = 1.0 / out.h[8];
    for (double& v : out.h) v *= inv;
    out.h[8] = 1.0;  // exact despite rounding
    return out;
  }
  double frob = 0.0;
  for (double v : out.h) frob += v * v;
  if (frob < kWeightEps * kWeightEps)
    throw DegenerateConfiguration("cannot normalize the zero matrix");
  const double inv = 1.0 / std::sqrt(frob);
  for (double& v : out.h) v *= inv;
  return out;
}

Homography Homography::inverse() const {
  const double d = det();
  if (std::abs(d) <= 1e-12)
    throw DegenerateConfiguration("homography is not invertible");
  const double inv = 1.0 / d;
  Homography out;
  out.h[0] = (h[4] * h[8] - h[5] * h[7]) * inv;
  out.h[1] = (h[2] * h[7] - h[1] * h[8]) * inv;
  out.h[2] = (h[1] * h[5] - h[2] * h[4]) * inv;
  out.h[3] = (h[5] * h[6] - h[3] * h[8]) * inv;
  out.h[4] = (h[0] * h[8] - h[2] * h[6]) * inv;
  out.h[5] = (h[2] * h[3] - h[0] * h[5]) * inv;
  out.h[6] = (h[3] * h[7] - h[4] * h[6]) * inv;
  out.h[7] = (h[1] * h[6] - h[0] * h[7]) * inv;
  out.h[8] = (h[0] * h[4] - h[1] * h[3]) * inv;
  return out.normalized();
}

Point2 apply_homography(const Homography& H, Point2 p) {
  const double w = H.h[6] * p.x + H.h[7] * p.y + H.h[8];
  if (std::abs(w) < kWeightEps)
    throw ProjectiveDegenerate("point maps to infinity");
  return Point2{(H.h[0] * p.x + H.h[1] * p.y + H.h[2]) / w,
                (H.h[3] * p.x + H.h[4] * p.y + H.h[5]) / w};
}

Homography estimate_homography_dlt(const std::vector<Point2>& pts1,
                                   const std::vector<Point2>& pts2) {
  if (pts1.size() != pts2.size())
    throw ParamError("estimate_homography_dlt: point counts differ");
  const std::size_t n = pts1.size();
  if (n < 4)
    throw InsufficientMatches("estimate_homography_dlt: need >= 4 points");

  const NormXform n1 = hartley_normalization(pts1);
  const NormXform n2 = hartley_normalization(pts2);

  Eigen::MatrixXd A(2 * n, 9);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = (pts1[i].x - n1.cx) * n1.scale;
    const double y = (pts1[i].y - n1.cy) * n1.scale;
    const double u = (pts2[i].x - n2.cx) * n2.scale;
    const double v = (pts2[i].y - n2.cy) * n2.scale;
    A.row(2 * i) << -x, -y, -1, 0, 0, 0, u * x, u * y, u;
    A.row(2 * i + 1) << 0, 0, 0, -x, -y, -1, v * x, v * y, v;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  // Rank test: an 8-rank design matrix determines H up to scale; anything
  // lower is a degenerate configuration (e.g. collinear points).
  if (sv(7) < 1e-9 * sv(0))
    throw DegenerateConfiguration("rank-deficient homography system");

  const Eigen::VectorXd hvec = svd.matrixV().col(8);
  Eigen::Matrix3d Hn;
  Hn << hvec(0), hvec(1), hvec(2), hvec(3), hvec(4), hvec(5), hvec(6), hvec(7),
      hvec(8);

  const Eigen::Matrix3d T1 = n1.matrix();
  const Eigen::Matrix3d T2 = n2.matrix();
  return from_matrix(T2.inverse() * Hn * T1);
}

RansacResult ransac_homography(const MatchSet& matches, const KeypointSet& kps1,
                               const KeypointSet& kps2,
                               const RansacParams& params,
                               std::uint64_t rng_seed) {
  const std::size_t n = matches.size();
  if (n < 4) throw InsufficientMatches("ransac_homography: need >= 4 matches");
  if (!(params.threshold > 0) || params.max_iters < 1 ||
      !(params.confidence > 0 && params.confidence < 1))
    throw ParamError("ransac_homography: invalid parameters");

  std::vector<Point2> p1(n), p2(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Match& m = matches[i];
    if (m.src_idx >= kps1.size() || m.dst_idx >= kps2.size())
      throw ParamError("ransac_homography: match index out of range");
    p1[i] = {kps1[m.src_idx].x, kps1[m.src_idx].y};
    p2[i] = {kps2[m.dst_idx].x, kps2[m.dst_idx].y};
  }

  std::size_t best_count = 0;
  double best_rmse = std::numeric_limits<double>::infinity();
  std::vector<bool> best_mask;
  Homography best_H;
  int iters_needed = params.max_iters;
  int iter = 0;

  std::vector<bool> mask(n);
  for (; iter < iters_needed; ++iter) {
    // Per-iteration subseed: hypothesis i is the same no matter how many
    // iterations end up running or in what order they are evaluated.
    Rng rng(Rng::mix(rng_seed, static_cast<std::uint64_t>(iter)));
    std::array<std::size_t, 4> idx{};
    for (int k = 0; k < 4;) {
      const std::size_t cand = rng.next_below(static_cast<std::uint32_t>(n));
      bool dup = false;
      for (int m = 0; m < k; ++m) dup |= idx[m] == cand;
      if (!dup) idx[k++] = cand;
    }
    std::array<Point2, 4> s1{p1[idx[0]], p1[idx[1]], p1[idx[2]], p1[idx[3]]};
    std::array<Point2, 4> s2{p2[idx[0]], p2[idx[1]], p2[idx[2]], p2[idx[3]]};
    if (sample_degenerate(s1) || sample_degenerate(s2)) continue;

    Homography H;
    try {
      H = estimate_homography_dlt({s1.begin(), s1.end()},
                                  {s2.begin(), s2.end()});
    } catch (const DegenerateConfiguration&) {
      continue;
    }
    Homography Hinv;
    try {
      Hinv = H.inverse();
    } catch (const DegenerateConfiguration&) {
      continue;
    }

    std::size_t count = 0;
    double err_sq_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double e;
      try {
        e = symmetric_error(H, Hinv, p1[i], p2[i]);
      } catch (const ProjectiveDegenerate&) {
        mask[i] = false;
        continue;
      }
      mask[i] = e <= params.threshold;
      if (mask[i]) {
        ++count;
        err_sq_sum += e * e;
      }
    }
    if (count < 4) continue;
    const double rmse = std::sqrt(err_sq_sum / static_cast<double>(count));
    if (count > best_count || (count == best_count && rmse < best_rmse)) {
      best_count = count;
      best_rmse = rmse;
      best_mask = mask;
      best_H = H;
      // Adaptive stop: enough iterations that a clean sample was drawn with
      // the requested confidence.
      const double w =
          static_cast<double>(count) / static_cast<double>(n);
      const double p_clean = std::pow(w, 4);
      if (p_clean >= 1.0) {
        iters_needed = iter + 1;
      } else if (p_clean > 0) {
        const double need =
            std::log(1.0 - params.confidence) / std::log(1.0 - p_clean);
        iters_needed = std::min<int>(
            params.max_iters,
            std::max<int>(iter + 1, static_cast<int>(std::ceil(need))));
      }
    }
  }

  if (best_count < 4)
    throw NoModelFound("ransac_homography: no hypothesis reached 4 inliers");

  RansacResult result;
  result.iterations_run = iter;

  // Refit on the winning inlier set and recompute membership under the
  // refit model; fall back to the raw hypothesis if the refit degenerates.
  std::vector<Point2> in1, in2;
  in1.reserve(best_count);
  in2.reserve(best_count);
  for (std::size_t i = 0; i < n; ++i) {
    if (best_mask[i]) {
      in1.push_back(p1[i]);
      in2.push_back(p2[i]);
    }
  }
  Homography refit = best_H;
  bool refit_ok = true;
  try {
    refit = estimate_homography_dlt(in1, in2);
  } catch (const DegenerateConfiguration&) {
    refit_ok = false;
  }
  if (refit_ok) {
    try {
      const Homography refit_inv = refit.inverse();
      std::vector<bool> refit_mask(n);
      std::size_t count = 0;
      double err_sq_sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double e;
        try {
          e = symmetric_error(refit, refit_inv, p1[i], p2[i]);
        } catch (const ProjectiveDegenerate&) {
          refit_mask[i] = false;
          continue;
        }
        refit_mask[i] = e <= params.threshold;
        if (refit_mask[i]) {
          ++count;
          err_sq_sum += e * e;
        }
      }
      if (count >= 4) {
        result.homography = refit;
        result.inlier_mask = std::move(refit_mask);
        result.inlier_rmse = std::sqrt(err_sq_sum / static_cast<double>(count));
        return result;
      }
    } catch (const DegenerateConfiguration&) {
    }
  }

  result.homography = best_H;
  result.inlier_mask = std::move(best_mask);
  result.inlier_rmse = best_rmse;
  return result;
}

}  // namespace pairmine
