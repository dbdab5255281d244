#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "pairmine/errors.hpp"
#include "pairmine/filters.hpp"
#include "pairmine/matching.hpp"
#include "pairmine/sift.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace pairmine;
using testsupport::make_blob;
using testsupport::make_checkerboard;
using testsupport::make_texture;

namespace {

double min_distance_to(const KeypointSet& kps, double x, double y) {
  double best = 1e30;
  for (const Keypoint& kp : kps)
    best = std::min(best, std::hypot(kp.x - x, kp.y - y));
  return best;
}

// Forward rotation about the image center matching rotate_about_center.
Point2 rotate_fwd(double x, double y, double cx, double cy, double radians) {
  const double c = std::cos(radians);
  const double s = std::sin(radians);
  return {cx + c * (x - cx) - s * (y - cy), cy + s * (x - cx) + c * (y - cy)};
}

}  // namespace

TEST_CASE("detect_keypoints rejects tiny images and empty content") {
  CHECK_THROWS_AS(detect_keypoints(RasterImage::make(31, 45, 1), SiftParams{}),
                  DimensionError);

  RasterImage flat = RasterImage::make(64, 64, 1);
  std::fill(flat.data.begin(), flat.data.end(), 0.5f);
  CHECK(detect_keypoints(flat, SiftParams{}).empty());
}

TEST_CASE("keypoints respect bounds, contrast and orientation invariants") {
  const RasterImage img = make_texture(192, 160, 21);
  const SiftParams params;
  const KeypointSet kps = detect_keypoints(img, params);
  REQUIRE(kps.size() > 50);
  for (const Keypoint& kp : kps) {
    CHECK(kp.x >= 0.0);
    CHECK(kp.x < img.width);
    CHECK(kp.y >= 0.0);
    CHECK(kp.y < img.height);
    CHECK(kp.scale > 0.0);
    CHECK(std::abs(kp.response) > params.contrast_threshold);
    CHECK(kp.orientation >= 0.0);
    CHECK(kp.orientation < 2.0 * 3.14159265358979323846 + 1e-12);
  }
}

TEST_CASE("detection is deterministic and the cap keeps the strongest") {
  const RasterImage img = make_texture(256, 256, 33);
  const SiftParams params;
  const KeypointSet a = detect_keypoints(img, params);
  const KeypointSet b = detect_keypoints(img, params);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].x == b[i].x);
    CHECK(a[i].y == b[i].y);
    CHECK(a[i].scale == b[i].scale);
    CHECK(a[i].orientation == b[i].orientation);
    CHECK(a[i].response == b[i].response);
  }

  REQUIRE(a.size() > 50);
  SiftParams capped = params;
  capped.keypoint_cap = 50;
  const KeypointSet c = detect_keypoints(img, capped);
  REQUIRE(c.size() == 50);
  // The capped list is the prefix of the full strongest-first ordering.
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK(c[i].x == a[i].x);
    CHECK(c[i].y == a[i].y);
    CHECK(c[i].response == a[i].response);
  }
  for (std::size_t i = 1; i < a.size(); ++i)
    CHECK(std::abs(a[i - 1].response) >= std::abs(a[i].response));
}

TEST_CASE("a Gaussian blob is localized at its center") {
  const RasterImage img = make_blob(128, 128, 64.0, 80.0, 4.0);

  // Independent check of the expectation itself: the strongest dense DoG
  // response sits at the blob center.
  const RasterImage dog = testsupport::dense_dog(img, 3.2, 3.2 * std::cbrt(2.0));
  int best_x = 0, best_y = 0;
  float best = 0.0f;
  for (int y = 0; y < dog.height; ++y)
    for (int x = 0; x < dog.width; ++x)
      if (std::abs(dog.at(y, x)) > best) {
        best = std::abs(dog.at(y, x));
        best_x = x;
        best_y = y;
      }
  CHECK(std::hypot(best_x - 64.0, best_y - 80.0) <= 1.0);

  const KeypointSet kps = detect_keypoints(img, SiftParams{});
  REQUIRE_FALSE(kps.empty());
  CHECK(min_distance_to(kps, 64.0, 80.0) <= 1.5);
}

TEST_CASE("checkerboard keypoints avoid flat square interiors") {
  const int square = 8;
  const RasterImage img = make_checkerboard(256, 256, square);

  // Oracle for the expectation: strict local extrema of the dense DoG above
  // the contrast threshold hug the square boundaries.
  const RasterImage dog = testsupport::dense_dog(img, 1.6, 1.6 * std::cbrt(2.0));
  for (int y = 1; y < dog.height - 1; ++y) {
    for (int x = 1; x < dog.width - 1; ++x) {
      const float v = dog.at(y, x);
      if (std::abs(v) <= 0.03f) continue;
      bool is_max = true, is_min = true;
      for (int dy = -1; dy <= 1 && (is_max || is_min); ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const float nb = dog.at(y + dy, x + dx);
          if (nb >= v) is_max = false;
          if (nb <= v) is_min = false;
        }
      if (!is_max && !is_min) continue;
      const double ex = std::abs(std::remainder(x + 0.5, square));
      const double ey = std::abs(std::remainder(y + 0.5, square));
      CHECK(std::min(ex, ey) <= 3.5);  // near a grid line
    }
  }

  // A checkerboard is all edges and saddles, so the edge-response filter
  // prunes nearly everything a corner detector would report.
  const KeypointSet kps = detect_keypoints(img, SiftParams{});
  CHECK(kps.size() <= 64);
}

TEST_CASE("a grid of Gaussian dots is localized dot by dot") {
  RasterImage img = RasterImage::make(224, 224, 1);
  const double sigma = 2.5;
  const double inv = -1.0 / (2.0 * sigma * sigma);
  std::vector<Point2> centers;
  for (int gy = 0; gy < 7; ++gy)
    for (int gx = 0; gx < 7; ++gx)
      centers.push_back({16.0 + 32.0 * gx, 16.0 + 32.0 * gy});
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      float v = 0.0f;
      for (const Point2& c : centers) {
        const double dx = x - c.x;
        const double dy = y - c.y;
        v += static_cast<float>(std::exp((dx * dx + dy * dy) * inv));
      }
      img.at(y, x) = std::min(v, 1.0f);
    }

  const KeypointSet kps = detect_keypoints(img, SiftParams{});
  REQUIRE(kps.size() >= centers.size());
  for (const Point2& c : centers)
    CHECK(min_distance_to(kps, c.x, c.y) <= 1.5);
}

TEST_CASE("descriptors are unit norm with non-negative entries") {
  const RasterImage img = make_texture(224, 224, 44);
  const KeypointSet kps = detect_keypoints(img, SiftParams{});
  REQUIRE_FALSE(kps.empty());
  const DescribedSet ds = compute_descriptors(img, kps, SiftParams{});
  REQUIRE(ds.keypoints.size() == ds.descriptors.size());
  REQUIRE_FALSE(ds.descriptors.empty());
  for (const Descriptor& d : ds.descriptors) {
    double norm_sq = 0.0;
    for (float v : d.values) {
      CHECK(v >= 0.0f);
      norm_sq += static_cast<double>(v) * v;
    }
    CHECK(std::abs(std::sqrt(norm_sq) - 1.0) <= 1e-6);
  }
}

TEST_CASE("descriptors on a constant image are dropped with their keypoints") {
  RasterImage flat = RasterImage::make(64, 64, 1);
  std::fill(flat.data.begin(), flat.data.end(), 0.25f);
  Keypoint kp;
  kp.x = 32.0;
  kp.y = 32.0;
  kp.scale = 2.0;
  kp.octave = 0;
  kp.level = 1;
  const DescribedSet ds = compute_descriptors(flat, {kp}, SiftParams{});
  CHECK(ds.keypoints.empty());
  CHECK(ds.descriptors.empty());
}

TEST_CASE("blob-center descriptor repeats with a 90-degree period") {
  const RasterImage img = make_blob(128, 128, 64.0, 80.0, 4.0);
  const KeypointSet kps = detect_keypoints(img, SiftParams{});
  REQUIRE_FALSE(kps.empty());
  Keypoint center = kps[0];
  for (const Keypoint& kp : kps)
    if (std::hypot(kp.x - 64.0, kp.y - 80.0) <
        std::hypot(center.x - 64.0, center.y - 80.0))
      center = kp;
  REQUIRE(std::hypot(center.x - 64.0, center.y - 80.0) <= 1.5);

  const DescribedSet ds = compute_descriptors(img, {center}, SiftParams{});
  REQUIRE(ds.descriptors.size() == 1);
  double bin_sum[8] = {0.0};
  for (int cell = 0; cell < 16; ++cell)
    for (int o = 0; o < 8; ++o)
      bin_sum[o] += ds.descriptors[0].values[cell * 8 + o];
  const double mean =
      (bin_sum[0] + bin_sum[1] + bin_sum[2] + bin_sum[3] + bin_sum[4] +
       bin_sum[5] + bin_sum[6] + bin_sum[7]) /
      8.0;
  REQUIRE(mean > 0.0);
  // The square sampling window weights diagonal directions more than axis
  // directions on a radial gradient field, but rotating the blob by 90
  // degrees maps the whole apparatus onto itself, so orientation bins two
  // apart collect the same mass.
  for (int o = 0; o < 8; ++o) {
    const double a = bin_sum[o];
    const double b = bin_sum[(o + 2) % 8];
    CHECK(std::abs(a - b) / std::max(a, b) <= 0.10);
  }
}

TEST_CASE("descriptors survive an exact 90-degree rotation") {
  const RasterImage img = make_texture(256, 256, 55);
  const RasterImage rot = testsupport::rotate90_ccw(img);

  const SiftParams params;
  const DescribedSet a =
      compute_descriptors(img, detect_keypoints(img, params), params);
  const DescribedSet b =
      compute_descriptors(rot, detect_keypoints(rot, params), params);
  REQUIRE_FALSE(a.descriptors.empty());
  REQUIRE_FALSE(b.descriptors.empty());

  const MatchSet matches = match_descriptors(a.descriptors, b.descriptors, 0.8);
  // (x, y) -> (y, w-1-x) under the exact rotation.
  int verified = 0;
  for (const Match& m : matches) {
    const Keypoint& ka = a.keypoints[m.src_idx];
    const Keypoint& kb = b.keypoints[m.dst_idx];
    const double ex = ka.y;
    const double ey = img.width - 1 - ka.x;
    if (std::hypot(kb.x - ex, kb.y - ey) > 2.0) continue;
    ++verified;
    CHECK(m.distance < 0.35);
  }
  CHECK(verified >= 20);
}

TEST_CASE("keypoint repeatability under in-plane rotation") {
  const int n = 256;
  const double c = (n - 1) / 2.0;
  const double disc_r = n / 2.0 - 8.0;
  const RasterImage base =
      testsupport::disc_mask(make_texture(n, n, 66), disc_r);
  const KeypointSet kps1 = detect_keypoints(base, SiftParams{});
  REQUIRE(kps1.size() > 100);

  for (double deg : {30.0, 60.0, 90.0}) {
    const double rad = deg * 3.14159265358979323846 / 180.0;
    const RasterImage rot = testsupport::rotate_about_center(base, rad);
    const KeypointSet kps2 = detect_keypoints(rot, SiftParams{});
    REQUIRE_FALSE(kps2.empty());

    int eligible = 0;
    int repeated = 0;
    for (const Keypoint& kp : kps1) {
      const Point2 p = rotate_fwd(kp.x, kp.y, c, c, rad);
      if (std::hypot(p.x - c, p.y - c) > disc_r - 12.0) continue;
      ++eligible;
      if (min_distance_to(kps2, p.x, p.y) <= 2.0) ++repeated;
    }
    REQUIRE(eligible > 50);
    INFO("rotation ", deg, " deg: ", repeated, "/", eligible);
    CHECK(static_cast<double>(repeated) / eligible >= 0.5);
  }
}

TEST_CASE("keypoint scales roughly double when the image doubles") {
  const RasterImage img = make_texture(160, 160, 77);
  const RasterImage big = resize_bilinear(img, 320, 320);
  const KeypointSet kps1 = detect_keypoints(img, SiftParams{});
  const KeypointSet kps2 = detect_keypoints(big, SiftParams{});
  REQUIRE(kps1.size() > 50);
  REQUIRE_FALSE(kps2.empty());

  int repeated = 0;
  int in_band = 0;
  for (const Keypoint& kp : kps1) {
    // Pixel centers map through (x + 0.5) * 2 - 0.5 when sizes double.
    const double ex = 2.0 * kp.x + 0.5;
    const double ey = 2.0 * kp.y + 0.5;
    const Keypoint* nearest = nullptr;
    double best = 2.0;
    for (const Keypoint& other : kps2) {
      const double d = std::hypot(other.x - ex, other.y - ey);
      if (d <= best) {
        best = d;
        nearest = &other;
      }
    }
    if (!nearest) continue;
    ++repeated;
    const double ratio = nearest->scale / kp.scale;
    if (ratio >= 1.7 && ratio <= 2.3) ++in_band;
  }
  REQUIRE(repeated > 20);
  INFO("scale ratio in band: ", in_band, "/", repeated);
  CHECK(static_cast<double>(in_band) / repeated >= 0.5);
}

TEST_CASE("multiple dominant orientations duplicate the keypoint") {
  const RasterImage img = make_texture(256, 256, 88);
  const KeypointSet kps = detect_keypoints(img, SiftParams{});
  int duplicates = 0;
  for (std::size_t i = 1; i < kps.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (kps[i].x == kps[j].x && kps[i].y == kps[j].y &&
          kps[i].scale == kps[j].scale &&
          kps[i].orientation != kps[j].orientation)
        ++duplicates;
    }
  }
  CHECK(duplicates > 0);
}

TEST_CASE("keypoints_to_csv lists one line per keypoint") {
  const RasterImage img = make_blob(128, 128, 64.0, 64.0, 4.0);
  const KeypointSet kps = detect_keypoints(img, SiftParams{});
  REQUIRE_FALSE(kps.empty());
  const std::string csv = keypoints_to_csv(kps);

  std::istringstream in(csv);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "x,y,scale,orientation,response");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 4);
  }
  CHECK(rows == kps.size());
}
