#include "pairmine/sift.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <vector>

#include "pairmine/errors.hpp"
#include "pairmine/filters.hpp"

namespace pairmine {
namespace {

constexpr int kBorder = 4;          // candidate scan margin, px
constexpr int kDescWidth = 4;       // spatial bins per side
constexpr int kDescBins = 8;        // orientation bins per spatial cell
constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Pyramid {
  // gauss[o][i]: octave o blurred to base_sigma * 2^(i/intervals) (octave
  // frame); dog[o][i] = gauss[o][i+1] - gauss[o][i].
  std::vector<std::vector<RasterImage>> gauss;
  std::vector<std::vector<RasterImage>> dog;
};

RasterImage subtract(const RasterImage& a, const RasterImage& b) {
  RasterImage out = RasterImage::make(a.width, a.height, 1);
  for (std::size_t i = 0; i < a.data.size(); ++i)
    out.data[i] = a.data[i] - b.data[i];
  return out;
}

Pyramid build_pyramid(const RasterImage& img, const SiftParams& p,
                      bool with_dog) {
  const int levels = p.intervals + 3;
  const double k = std::pow(2.0, 1.0 / p.intervals);

  Pyramid pyr;
  const double pre2 =
      p.base_sigma * p.base_sigma - p.camera_sigma * p.camera_sigma;
  RasterImage base = gaussian_blur(img, std::sqrt(std::max(pre2, 0.01)));

  for (int o = 0; o < p.max_octaves; ++o) {
    if (std::min(base.width, base.height) < p.min_dimension) break;
    std::vector<RasterImage> octave;
    octave.reserve(levels);
    octave.push_back(std::move(base));
    for (int i = 1; i < levels; ++i) {
      const double sig_prev = p.base_sigma * std::pow(k, i - 1);
      const double sig_diff =
          sig_prev * std::sqrt(k * k - 1.0);  // total blur becomes sig_prev*k
      octave.push_back(gaussian_blur(octave.back(), sig_diff));
    }
    // Level `intervals` carries blur 2*base_sigma; halving it seeds the next
    // octave at base_sigma again.
    const RasterImage& seed = octave[p.intervals];
    const bool more = o + 1 < p.max_octaves && seed.width >= 2 &&
                      seed.height >= 2 &&
                      std::min(seed.width / 2, seed.height / 2) >=
                          p.min_dimension;
    if (more) base = downsample2(seed);
    pyr.gauss.push_back(std::move(octave));
    if (!more) break;
  }

  if (with_dog) {
    pyr.dog.resize(pyr.gauss.size());
    for (std::size_t o = 0; o < pyr.gauss.size(); ++o) {
      pyr.dog[o].reserve(levels - 1);
      for (int i = 0; i + 1 < levels; ++i)
        pyr.dog[o].push_back(subtract(pyr.gauss[o][i + 1], pyr.gauss[o][i]));
    }
  }
  return pyr;
}

bool is_extremum(const std::vector<RasterImage>& dog, int l, int y, int x) {
  const float v = dog[l].at(y, x);
  if (v > 0) {
    for (int dl = -1; dl <= 1; ++dl)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (dl == 0 && dy == 0 && dx == 0) continue;
          if (v < dog[l + dl].at(y + dy, x + dx)) return false;
        }
  } else {
    for (int dl = -1; dl <= 1; ++dl)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (dl == 0 && dy == 0 && dx == 0) continue;
          if (v > dog[l + dl].at(y + dy, x + dx)) return false;
        }
  }
  return true;
}

struct Refined {
  double dx = 0, dy = 0, ds = 0;  // subpixel offset at the final cell
  double contrast = 0;
  int x = 0, y = 0, level = 0;
  bool ok = false;
};

Refined refine_extremum(const std::vector<RasterImage>& dog,
                        const SiftParams& p, int level, int y, int x) {
  Refined out;
  const int w = dog[0].width;
  const int h = dog[0].height;
  double gx = 0, gy = 0, gs = 0;
  double ox = 0, oy = 0, os = 0;
  bool converged = false;

  for (int step = 0; step < p.max_refine_steps; ++step) {
    const RasterImage& d0 = dog[level - 1];
    const RasterImage& d1 = dog[level];
    const RasterImage& d2 = dog[level + 1];
    const double v = d1.at(y, x);

    gx = 0.5 * (d1.at(y, x + 1) - d1.at(y, x - 1));
    gy = 0.5 * (d1.at(y + 1, x) - d1.at(y - 1, x));
    gs = 0.5 * (d2.at(y, x) - d0.at(y, x));

    const double dxx = d1.at(y, x + 1) + d1.at(y, x - 1) - 2 * v;
    const double dyy = d1.at(y + 1, x) + d1.at(y - 1, x) - 2 * v;
    const double dss = d2.at(y, x) + d0.at(y, x) - 2 * v;
    const double dxy = 0.25 * (d1.at(y + 1, x + 1) - d1.at(y + 1, x - 1) -
                               d1.at(y - 1, x + 1) + d1.at(y - 1, x - 1));
    const double dxs = 0.25 * (d2.at(y, x + 1) - d2.at(y, x - 1) -
                               d0.at(y, x + 1) + d0.at(y, x - 1));
    const double dys = 0.25 * (d2.at(y + 1, x) - d2.at(y - 1, x) -
                               d0.at(y + 1, x) + d0.at(y - 1, x));

    // Cramer solve of H * delta = -g.
    const double det = dxx * (dyy * dss - dys * dys) -
                       dxy * (dxy * dss - dys * dxs) +
                       dxs * (dxy * dys - dyy * dxs);
    if (std::abs(det) < 1e-30) return out;
    const double inv = 1.0 / det;
    ox = -inv * (gx * (dyy * dss - dys * dys) - dxy * (gy * dss - gs * dys) +
                 dxs * (gy * dys - gs * dyy));
    oy = -inv * (dxx * (gy * dss - gs * dys) - gx * (dxy * dss - dxs * dys) +
                 dxs * (dxy * gs - dxs * gy));
    os = -inv * (dxx * (dyy * gs - dys * gy) - dxy * (dxy * gs - dxs * gy) +
                 gx * (dxy * dys - dyy * dxs));

    if (std::abs(ox) < 0.5 && std::abs(oy) < 0.5 && std::abs(os) < 0.5) {
      converged = true;
      break;
    }
    x += static_cast<int>(std::lround(ox));
    y += static_cast<int>(std::lround(oy));
    level += static_cast<int>(std::lround(os));
    if (level < 1 || level > p.intervals || x < kBorder || x >= w - kBorder ||
        y < kBorder || y >= h - kBorder)
      return out;
  }
  if (!converged) return out;

  const double contrast =
      dog[level].at(y, x) + 0.5 * (gx * ox + gy * oy + gs * os);
  if (std::abs(contrast) <= p.contrast_threshold) return out;

  // Edge rejection on the 2x2 spatial Hessian.
  const RasterImage& d1 = dog[level];
  const double v = d1.at(y, x);
  const double dxx = d1.at(y, x + 1) + d1.at(y, x - 1) - 2 * v;
  const double dyy = d1.at(y + 1, x) + d1.at(y - 1, x) - 2 * v;
  const double dxy = 0.25 * (d1.at(y + 1, x + 1) - d1.at(y + 1, x - 1) -
                             d1.at(y - 1, x + 1) + d1.at(y - 1, x - 1));
  const double tr = dxx + dyy;
  const double det2 = dxx * dyy - dxy * dxy;
  const double r = p.edge_ratio;
  if (det2 <= 0 || tr * tr * r >= (r + 1) * (r + 1) * det2) return out;

  out.dx = ox;
  out.dy = oy;
  out.ds = os;
  out.contrast = contrast;
  out.x = x;
  out.y = y;
  out.level = level;
  out.ok = true;
  return out;
}

/// 36-bin gradient orientation histogram around (cx, cy) on one Gaussian
/// level; returns interpolated peak orientations in [0, 2*pi).
std::vector<double> dominant_orientations(const RasterImage& g, int cx, int cy,
                                          double scale_oct,
                                          const SiftParams& p) {
  const int bins = p.orientation_bins;
  const double sigma_w = 1.5 * scale_oct;
  const int radius = static_cast<int>(std::lround(3.0 * sigma_w));
  const double wscale = -1.0 / (2.0 * sigma_w * sigma_w);

  std::vector<double> hist(bins, 0.0);
  for (int i = -radius; i <= radius; ++i) {
    const int y = cy + i;
    if (y <= 0 || y >= g.height - 1) continue;
    for (int j = -radius; j <= radius; ++j) {
      const int x = cx + j;
      if (x <= 0 || x >= g.width - 1) continue;
      const double dx = g.at(y, x + 1) - g.at(y, x - 1);
      const double dy = g.at(y - 1, x) - g.at(y + 1, x);
      const double mag = std::sqrt(dx * dx + dy * dy);
      if (mag == 0.0) continue;
      double ang = std::atan2(dy, dx);
      if (ang < 0) ang += kTwoPi;
      int bin = static_cast<int>(ang * bins / kTwoPi);
      if (bin >= bins) bin = 0;
      hist[bin] += mag * std::exp((i * i + j * j) * wscale);
    }
  }

  // One pass of circular [1 4 6 4 1]/16 smoothing.
  std::vector<double> smooth(bins);
  for (int i = 0; i < bins; ++i) {
    smooth[i] = (hist[(i - 2 + bins) % bins] + hist[(i + 2) % bins]) / 16.0 +
                4.0 * (hist[(i - 1 + bins) % bins] + hist[(i + 1) % bins]) /
                    16.0 +
                6.0 * hist[i] / 16.0;
  }

  const double maxv = *std::max_element(smooth.begin(), smooth.end());
  std::vector<double> peaks;
  if (maxv <= 0.0) return peaks;
  const double floor_v = p.orientation_peak_ratio * maxv;
  for (int i = 0; i < bins; ++i) {
    const double l = smooth[(i - 1 + bins) % bins];
    const double r = smooth[(i + 1) % bins];
    const double c = smooth[i];
    if (c > l && c > r && c >= floor_v) {
      double bin = i + 0.5 * (l - r) / (l - 2 * c + r);
      if (bin < 0) bin += bins;
      if (bin >= bins) bin -= bins;
      double ang = bin * kTwoPi / bins;
      if (ang >= kTwoPi) ang -= kTwoPi;
      peaks.push_back(ang);
    }
  }
  return peaks;
}

bool keypoint_order(const Keypoint& a, const Keypoint& b) {
  if (a.response != b.response) return a.response > b.response;
  if (a.x != b.x) return a.x < b.x;
  if (a.y != b.y) return a.y < b.y;
  if (a.scale != b.scale) return a.scale < b.scale;
  return a.orientation < b.orientation;
}

void validate_sift_params(const SiftParams& p) {
  if (p.intervals < 1 || p.max_octaves < 1 || p.orientation_bins < 2 ||
      p.keypoint_cap < 1 || p.max_refine_steps < 1)
    throw ParamError("sift: counts must be positive");
  if (p.base_sigma <= 0 || p.camera_sigma < 0 || p.contrast_threshold <= 0 ||
      p.edge_ratio <= 0 || p.descriptor_clamp <= 0)
    throw ParamError("sift: thresholds must be positive");
}

}  // namespace

KeypointSet detect_keypoints(const RasterImage& img, const SiftParams& p) {
  validate_sift_params(p);
  if (img.channels != 1)
    throw DimensionError("detect_keypoints requires a gray image");
  if (std::min(img.width, img.height) < 32)
    throw DimensionError("detect_keypoints requires min(w, h) >= 32");

  const Pyramid pyr = build_pyramid(img, p, /*with_dog=*/true);
  const double prefilter = 0.5 * p.contrast_threshold;

  KeypointSet kps;
  for (std::size_t o = 0; o < pyr.dog.size(); ++o) {
    const auto& dog = pyr.dog[o];
    const int w = dog[0].width;
    const int h = dog[0].height;
    const double oct_scale = static_cast<double>(1 << o);
    for (int l = 1; l <= p.intervals; ++l) {
      for (int y = kBorder; y < h - kBorder; ++y) {
        for (int x = kBorder; x < w - kBorder; ++x) {
          if (std::abs(dog[l].at(y, x)) <= prefilter) continue;
          if (!is_extremum(dog, l, y, x)) continue;
          const Refined r = refine_extremum(dog, p, l, y, x);
          if (!r.ok) continue;

          const double scale_oct =
              p.base_sigma *
              std::pow(2.0, (r.level + r.ds) / p.intervals);
          Keypoint kp;
          kp.x = (r.x + r.dx) * oct_scale;
          kp.y = (r.y + r.dy) * oct_scale;
          kp.scale = scale_oct * oct_scale;
          kp.response = std::abs(r.contrast);
          kp.octave = static_cast<int>(o);
          kp.level = r.level;

          const auto peaks = dominant_orientations(
              pyr.gauss[o][r.level], r.x, r.y, scale_oct, p);
          for (double ang : peaks) {
            kp.orientation = ang;
            kps.push_back(kp);
          }
        }
      }
    }
  }

  std::sort(kps.begin(), kps.end(), keypoint_order);
  kps.erase(std::unique(kps.begin(), kps.end(),
                        [](const Keypoint& a, const Keypoint& b) {
                          return a.x == b.x && a.y == b.y &&
                                 a.scale == b.scale &&
                                 a.orientation == b.orientation;
                        }),
            kps.end());
  if (kps.size() > p.keypoint_cap) kps.resize(p.keypoint_cap);
  return kps;
}

DescribedSet compute_descriptors(const RasterImage& img, const KeypointSet& kps,
                                 const SiftParams& p) {
  validate_sift_params(p);
  if (img.channels != 1)
    throw DimensionError("compute_descriptors requires a gray image");
  const Pyramid pyr = build_pyramid(img, p, /*with_dog=*/false);

  constexpr int d = kDescWidth;
  constexpr int n = kDescBins;
  const double bins_per_rad = n / kTwoPi;
  const double exp_scale = -1.0 / (d * d * 0.5);

  DescribedSet out;
  out.keypoints.reserve(kps.size());
  out.descriptors.reserve(kps.size());

  for (const Keypoint& kp : kps) {
    if (kp.x < 0 || kp.x >= img.width || kp.y < 0 || kp.y >= img.height)
      throw ParamError("compute_descriptors: keypoint outside the image");
    if (kp.octave < 0 || kp.octave >= static_cast<int>(pyr.gauss.size()) ||
        kp.level < 0 ||
        kp.level >= static_cast<int>(pyr.gauss[kp.octave].size()))
      throw ParamError("compute_descriptors: keypoint pyramid slot invalid");

    const RasterImage& g = pyr.gauss[kp.octave][kp.level];
    const double oct_scale = static_cast<double>(1 << kp.octave);
    const double scl = kp.scale / oct_scale;
    const int ptx = static_cast<int>(std::lround(kp.x / oct_scale));
    const int pty = static_cast<int>(std::lround(kp.y / oct_scale));

    const double hist_width = 3.0 * scl;
    int radius = static_cast<int>(
        std::lround(hist_width * std::numbers::sqrt2 * (d + 1) * 0.5));
    const int diag = static_cast<int>(
        std::ceil(std::hypot(g.width, g.height)));
    radius = std::min(radius, diag);

    const double cos_t = std::cos(kp.orientation) / hist_width;
    const double sin_t = std::sin(kp.orientation) / hist_width;

    // (d+2)^2 x (n+2) scratch; margins absorb the trilinear spill and the
    // circular orientation wrap.
    double hist[(d + 2) * (d + 2) * (n + 2)] = {0.0};
    auto slot = [&](int r, int c, int b) -> double& {
      return hist[(r * (d + 2) + c) * (n + 2) + b];
    };

    for (int i = -radius; i <= radius; ++i) {
      for (int j = -radius; j <= radius; ++j) {
        const double c_rot = j * cos_t - i * sin_t;
        const double r_rot = j * sin_t + i * cos_t;
        double rbin = r_rot + d / 2 - 0.5;
        double cbin = c_rot + d / 2 - 0.5;
        const int y = pty + i;
        const int x = ptx + j;
        if (!(rbin > -1 && rbin < d && cbin > -1 && cbin < d && y > 0 &&
              y < g.height - 1 && x > 0 && x < g.width - 1))
          continue;

        const double dx = g.at(y, x + 1) - g.at(y, x - 1);
        const double dy = g.at(y - 1, x) - g.at(y + 1, x);
        const double mag = std::sqrt(dx * dx + dy * dy);
        if (mag == 0.0) continue;
        double ang = std::atan2(dy, dx);
        if (ang < 0) ang += kTwoPi;
        const double weight =
            std::exp((c_rot * c_rot + r_rot * r_rot) * exp_scale);

        double obin = (ang - kp.orientation) * bins_per_rad;
        int r0 = static_cast<int>(std::floor(rbin));
        int c0 = static_cast<int>(std::floor(cbin));
        int o0 = static_cast<int>(std::floor(obin));
        rbin -= r0;
        cbin -= c0;
        obin -= o0;
        if (o0 < 0) o0 += n;
        if (o0 >= n) o0 -= n;

        const double v = mag * weight;
        const double v_r1 = v * rbin, v_r0 = v - v_r1;
        const double v_rc11 = v_r1 * cbin, v_rc10 = v_r1 - v_rc11;
        const double v_rc01 = v_r0 * cbin, v_rc00 = v_r0 - v_rc01;
        const double v_o1 = obin;
        slot(r0 + 1, c0 + 1, o0) += v_rc00 * (1 - v_o1);
        slot(r0 + 1, c0 + 1, o0 + 1) += v_rc00 * v_o1;
        slot(r0 + 1, c0 + 2, o0) += v_rc01 * (1 - v_o1);
        slot(r0 + 1, c0 + 2, o0 + 1) += v_rc01 * v_o1;
        slot(r0 + 2, c0 + 1, o0) += v_rc10 * (1 - v_o1);
        slot(r0 + 2, c0 + 1, o0 + 1) += v_rc10 * v_o1;
        slot(r0 + 2, c0 + 2, o0) += v_rc11 * (1 - v_o1);
        slot(r0 + 2, c0 + 2, o0 + 1) += v_rc11 * v_o1;
      }
    }

    Descriptor desc;
    double norm_sq = 0.0;
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        // Orientation is circular: bin n folds into 0, bin n+1 into 1.
        slot(i + 1, j + 1, 0) += slot(i + 1, j + 1, n);
        slot(i + 1, j + 1, 1) += slot(i + 1, j + 1, n + 1);
        for (int b = 0; b < n; ++b) {
          const double val = slot(i + 1, j + 1, b);
          desc.values[(i * d + j) * n + b] = static_cast<float>(val);
          norm_sq += val * val;
        }
      }
    }
    if (norm_sq < 1e-24) continue;  // no gradient support: drop with keypoint

    float inv = static_cast<float>(1.0 / std::sqrt(norm_sq));
    const float clamp = static_cast<float>(p.descriptor_clamp);
    double norm2_sq = 0.0;
    for (float& v : desc.values) {
      v = std::min(v * inv, clamp);
      norm2_sq += static_cast<double>(v) * v;
    }
    inv = static_cast<float>(1.0 / std::sqrt(norm2_sq));
    for (float& v : desc.values) v *= inv;

    out.keypoints.push_back(kp);
    out.descriptors.push_back(desc);
  }
  return out;
}

std::string keypoints_to_csv(const KeypointSet& kps) {
  std::string csv = "x,y,scale,orientation,response\n";
  char line[160];
  for (const Keypoint& kp : kps) {
    std::snprintf(line, sizeof(line), "%.9g,%.9g,%.9g,%.9g,%.9g\n", kp.x, kp.y,
                  kp.scale, kp.orientation, kp.response);
    csv += line;
  }
  return csv;
}

}  // namespace pairmine
