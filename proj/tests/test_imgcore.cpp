#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "pairmine/errors.hpp"
#include "pairmine/filters.hpp"
#include "pairmine/image.hpp"
#include "pairmine/image_io.hpp"
#include "pairmine/rng.hpp"
#include "support/synthetic.hpp"

using namespace pairmine;

namespace {

std::string data_path(const char* name) {
  return std::string(PAIRMINE_DATA_DIR) + "/" + name;
}

std::filesystem::path temp_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "pairmine_imgcore";
  std::filesystem::create_directories(dir);
  return dir;
}

RasterImage random_image(int w, int h, int c, std::uint64_t seed) {
  RasterImage img = RasterImage::make(w, h, c);
  Rng rng(seed);
  // Exact byte levels, scaled the same way the decoder scales them, so PNG
  // round trips reproduce the floats bitwise.
  for (float& v : img.data)
    v = static_cast<float>(rng.next_below(256)) * (1.0f / 255.0f);
  return img;
}

}  // namespace

TEST_CASE("RasterImage::make validates dimensions and channels") {
  CHECK_THROWS_AS(RasterImage::make(0, 5, 1), DimensionError);
  CHECK_THROWS_AS(RasterImage::make(5, -1, 1), DimensionError);
  CHECK_THROWS_AS(RasterImage::make(4, 4, 2), DimensionError);
  const RasterImage img = RasterImage::make(3, 2, 3);
  CHECK(img.data.size() == 3u * 2u * 3u);
  CHECK(img.pixel_count() == 6u);
}

TEST_CASE("decode_image reads gray PNG byte-exactly") {
  const RasterImage img = decode_image(data_path("gray2x2.png"));
  CHECK(img.width == 2);
  CHECK(img.height == 2);
  CHECK(img.channels == 1);
  CHECK(img.data[0] == 0.0f);
  CHECK(img.data[1] == 1.0f);
  CHECK(img.data[2] == 128.0f / 255.0f);
  CHECK(img.data[3] == 64.0f / 255.0f);
}

TEST_CASE("decode_image reads a 224x224 RGB JPEG") {
  const RasterImage img = decode_image(data_path("rgb224.jpg"));
  CHECK(img.width == 224);
  CHECK(img.height == 224);
  CHECK(img.channels == 3);
  const auto [lo, hi] = std::minmax_element(img.data.begin(), img.data.end());
  CHECK(*lo >= 0.0f);
  CHECK(*hi <= 1.0f);
}

TEST_CASE("decode_image failure modes") {
  CHECK_THROWS_AS(decode_image(data_path("truncated.jpg")), DecodeError);
  CHECK_THROWS_AS(decode_image("/nonexistent/nowhere.png"), DecodeError);

  const auto txt = temp_dir() / "not_an_image.txt";
  std::ofstream(txt) << "plain text, no image signature\n";
  CHECK_THROWS_AS(decode_image(txt.string()), DecodeError);
}

TEST_CASE("PNG encode/decode round trip is lossless for 8-bit data") {
  for (int channels : {1, 3}) {
    const RasterImage img = random_image(7, 5, channels, 42 + channels);
    const auto path =
        temp_dir() / ("roundtrip_" + std::to_string(channels) + ".png");
    encode_png(img, path.string());
    const RasterImage back = decode_image(path.string());
    REQUIRE(back.same_shape(img));
    CHECK(back.data == img.data);
  }
}

TEST_CASE("encode_png clamps out-of-range samples") {
  RasterImage img = RasterImage::make(2, 1, 1);
  img.at(0, 0) = -0.5f;
  img.at(0, 1) = 1.5f;
  const auto path = temp_dir() / "clamped.png";
  encode_png(img, path.string());
  const RasterImage back = decode_image(path.string());
  CHECK(back.data[0] == 0.0f);
  CHECK(back.data[1] == 1.0f);
}

TEST_CASE("to_gray matches Rec. 601 and passes gray through unchanged") {
  RasterImage rgb = RasterImage::make(2, 1, 3);
  // pure red and pure white
  rgb.at(0, 0, 0) = 1.0f;
  rgb.at(0, 1, 0) = 1.0f;
  rgb.at(0, 1, 1) = 1.0f;
  rgb.at(0, 1, 2) = 1.0f;
  const RasterImage gray = to_gray(rgb);
  REQUIRE(gray.channels == 1);
  CHECK(gray.at(0, 0) == doctest::Approx(0.299).epsilon(1e-6));
  CHECK(std::abs(gray.at(0, 1) - 1.0) <= 1e-9);

  const RasterImage g1 = random_image(4, 3, 1, 7);
  const RasterImage g2 = to_gray(g1);
  CHECK(g2.data == g1.data);
}

TEST_CASE("to_rgb replicates gray and passes RGB through") {
  const RasterImage g = random_image(3, 2, 1, 11);
  const RasterImage rgb = to_rgb(g);
  REQUIRE(rgb.channels == 3);
  for (int y = 0; y < g.height; ++y)
    for (int x = 0; x < g.width; ++x)
      for (int c = 0; c < 3; ++c) CHECK(rgb.at(y, x, c) == g.at(y, x));

  const RasterImage rgb2 = to_rgb(rgb);
  CHECK(rgb2.data == rgb.data);
}

TEST_CASE("gaussian_blur keeps constant images constant") {
  RasterImage img = RasterImage::make(9, 7, 1);
  std::fill(img.data.begin(), img.data.end(), 0.37f);
  for (double sigma : {0.8, 1.6, 3.0}) {
    const RasterImage out = gaussian_blur(img, sigma);
    for (float v : out.data) CHECK(v == doctest::Approx(0.37).epsilon(1e-6));
  }
}

TEST_CASE("gaussian_blur of a centered impulse matches a direct 2D Gaussian") {
  const int n = 31;
  const double sigma = 1.6;
  RasterImage img = RasterImage::make(n, n, 1);
  img.at(15, 15) = 1.0f;
  const RasterImage out = gaussian_blur(img, sigma);

  double sum = 0.0;
  for (float v : out.data) sum += v;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));

  // Direct 2D evaluation over the truncated square support, normalized.
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> direct(static_cast<std::size_t>(n) * n, 0.0);
  double mass = 0.0;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx) {
      const double v = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      direct[static_cast<std::size_t>(15 + dy) * n + (15 + dx)] = v;
      mass += v;
    }
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x)
      CHECK(std::abs(out.at(y, x) -
                     direct[static_cast<std::size_t>(y) * n + x] / mass) <=
            1e-6);

  // Radially monotone inside the inscribed disc of the kernel footprint.
  struct Sample {
    double r;
    float v;
  };
  std::vector<Sample> samples;
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      const double r = std::hypot(x - 15.0, y - 15.0);
      if (r <= radius + 1e-9) samples.push_back({r, out.at(y, x)});
    }
  std::sort(samples.begin(), samples.end(),
            [](const Sample& a, const Sample& b) { return a.r < b.r; });
  for (std::size_t i = 1; i < samples.size(); ++i)
    CHECK(samples[i].v <= samples[i - 1].v + 1e-7f);
}

TEST_CASE("gaussian_blur rejects bad inputs") {
  const RasterImage img = random_image(8, 8, 1, 3);
  CHECK_THROWS_AS(gaussian_blur(img, 0.0), ParamError);
  CHECK_THROWS_AS(gaussian_blur(img, -1.0), ParamError);
  CHECK_THROWS_AS(gaussian_blur(random_image(8, 8, 3, 3), 1.0),
                  DimensionError);
}

TEST_CASE("gaussian_blur is linear") {
  const RasterImage a = random_image(32, 32, 1, 101);
  const RasterImage b = random_image(32, 32, 1, 202);
  const double ca = 0.6, cb = -0.3;

  RasterImage mix = RasterImage::make(32, 32, 1);
  for (std::size_t i = 0; i < mix.data.size(); ++i)
    mix.data[i] = static_cast<float>(ca * a.data[i] + cb * b.data[i]);

  const RasterImage lhs = gaussian_blur(mix, 1.4);
  const RasterImage ba = gaussian_blur(a, 1.4);
  const RasterImage bb = gaussian_blur(b, 1.4);
  for (std::size_t i = 0; i < lhs.data.size(); ++i)
    CHECK(lhs.data[i] ==
          doctest::Approx(ca * ba.data[i] + cb * bb.data[i]).epsilon(1e-6));
}

TEST_CASE("gaussian_blur satisfies the semigroup property approximately") {
  const RasterImage img = testsupport::make_texture(48, 48, 5);
  const double s1 = 1.2, s2 = 1.6;
  const RasterImage twice = gaussian_blur(gaussian_blur(img, s1), s2);
  const RasterImage once = gaussian_blur(img, std::sqrt(s1 * s1 + s2 * s2));
  double mae = 0.0;
  for (std::size_t i = 0; i < img.data.size(); ++i)
    mae += std::abs(twice.data[i] - once.data[i]);
  mae /= static_cast<double>(img.data.size());
  CHECK(mae < 2e-3);
}

TEST_CASE("downsample2 keeps every second pixel from index 0") {
  RasterImage img = RasterImage::make(4, 4, 1);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) img.at(y, x) = static_cast<float>(10 * y + x);
  const RasterImage out = downsample2(img);
  REQUIRE(out.width == 2);
  REQUIRE(out.height == 2);
  CHECK(out.at(0, 0) == 0.0f);
  CHECK(out.at(0, 1) == 2.0f);
  CHECK(out.at(1, 0) == 20.0f);
  CHECK(out.at(1, 1) == 22.0f);

  const RasterImage big = random_image(224, 224, 1, 9);
  const RasterImage half = downsample2(big);
  CHECK(half.width == 112);
  CHECK(half.height == 112);

  CHECK_THROWS_AS(downsample2(RasterImage::make(1, 5, 1)), DimensionError);
}

TEST_CASE("resize_bilinear basics") {
  RasterImage img = RasterImage::make(8, 6, 1);
  std::fill(img.data.begin(), img.data.end(), 0.25f);
  const RasterImage up = resize_bilinear(img, 16, 12);
  REQUIRE(up.width == 16);
  REQUIRE(up.height == 12);
  for (float v : up.data) CHECK(v == doctest::Approx(0.25).epsilon(1e-6));

  const RasterImage tex = testsupport::make_texture(24, 24, 8);
  const RasterImage same = resize_bilinear(tex, 24, 24);
  for (std::size_t i = 0; i < tex.data.size(); ++i)
    CHECK(same.data[i] == doctest::Approx(tex.data[i]).epsilon(1e-6));
}
