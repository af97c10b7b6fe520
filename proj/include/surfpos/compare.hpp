#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "surfpos/heightmap.hpp"

namespace surfpos {

/// Row-major RGB raster, top row first.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<Rgb> pixels;

  RgbImage() = default;
  RgbImage(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, Rgb{0, 0, 0}) {}

  Rgb& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  const Rgb& at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

/// Height difference at which the error ramp saturates to pure red.
constexpr double kErrorMapSaturation = 0.10;  // m
/// Darkest shade the overlay uses for a defined cell.
constexpr int kOverlayFloor = 64;

inline std::uint8_t round_half_up(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
}

namespace detail {

inline void require_same_grid(const HeightMap& a, const HeightMap& b, const char* what) {
  if (!(a.params() == b.params())) throw Error(ErrorKind::ParamsMismatch, std::string(what) + ": heightmaps use different grids");
}

/// Image row for cell row b: the largest y is drawn at the top.
inline int image_row(const HeightMap& m, int b) { return m.rows() - 1 - b; }

}  // namespace detail

/// Blue (no difference) to red (>= 10 cm) ramp of |h_ref - h_cur| over the
/// cells both maps define; every other pixel is black.
inline RgbImage error_map(const HeightMap& reference, const HeightMap& current) {
  detail::require_same_grid(reference, current, "error_map");
  RgbImage img(reference.cols(), reference.rows());
  for (int b = 0; b < reference.rows(); ++b) {
    for (int a = 0; a < reference.cols(); ++a) {
      if (!reference.defined(a, b) || !current.defined(a, b)) continue;
      const double e = std::abs(reference.at(a, b) - current.at(a, b));
      const double c = std::min(e / kErrorMapSaturation, 1.0);
      img.at(a, detail::image_row(reference, b)) = {round_half_up(255.0 * c), 0, round_half_up(255.0 * (1.0 - c))};
    }
  }
  return img;
}

/// Shade of `h` within [lo, hi] mapped onto [kOverlayFloor, 255].
inline std::uint8_t overlay_shade(double h, double lo, double hi) {
  if (!(hi > lo)) return 255;
  return round_half_up(kOverlayFloor + (h - lo) / (hi - lo) * (255 - kOverlayFloor));
}

/// Reference heights in the blue channel, current heights in the red one.
/// `floor_cut`, when finite, hides cells lower than it (visual segmentation).
inline RgbImage overlay(const HeightMap& reference, const HeightMap& current,
                        double floor_cut = -std::numeric_limits<double>::infinity()) {
  detail::require_same_grid(reference, current, "overlay");
  const auto visible = [&](const HeightMap& m, int a, int b) { return m.defined(a, b) && !(m.at(a, b) < floor_cut); };
  const auto range = [&](const HeightMap& m) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int b = 0; b < m.rows(); ++b) {
      for (int a = 0; a < m.cols(); ++a) {
        if (!visible(m, a, b)) continue;
        lo = std::min(lo, m.at(a, b));
        hi = std::max(hi, m.at(a, b));
      }
    }
    return std::pair{lo, hi};
  };
  const auto [ref_lo, ref_hi] = range(reference);
  const auto [cur_lo, cur_hi] = range(current);

  RgbImage img(reference.cols(), reference.rows());
  for (int b = 0; b < reference.rows(); ++b) {
    for (int a = 0; a < reference.cols(); ++a) {
      Rgb& px = img.at(a, detail::image_row(reference, b));
      if (visible(current, a, b)) px[0] = overlay_shade(current.at(a, b), cur_lo, cur_hi);
      if (visible(reference, a, b)) px[2] = overlay_shade(reference.at(a, b), ref_lo, ref_hi);
    }
  }
  return img;
}

/// Grayscale rendering of one heightmap; undefined (or cut) cells are black.
inline RgbImage heightmap_image(const HeightMap& map, double floor_cut = -std::numeric_limits<double>::infinity()) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : map.cells()) {
    if (std::isnan(v) || v < floor_cut) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  RgbImage img(map.cols(), map.rows());
  for (int b = 0; b < map.rows(); ++b) {
    for (int a = 0; a < map.cols(); ++a) {
      if (!map.defined(a, b) || map.at(a, b) < floor_cut) continue;
      const std::uint8_t s = overlay_shade(map.at(a, b), lo, hi);
      img.at(a, detail::image_row(map, b)) = {s, s, s};
    }
  }
  return img;
}

struct PoseError {
  double rotation_deg = 0;
  double translation_mm = 0;
};

inline PoseError pose_error(const RigidTransform& estimated, const RigidTransform& ground_truth) {
  const Eigen::Matrix3d delta = estimated.rotation() * ground_truth.rotation().transpose();
  return {rad_to_deg(rotation_angle(delta)), 1000.0 * (estimated.translation() - ground_truth.translation()).norm()};
}

struct ErrorSummary {
  PoseError mean;
  PoseError median;
};

inline ErrorSummary error_statistics(const std::vector<PoseError>& errors) {
  if (errors.empty()) throw Error(ErrorKind::InvalidInput, "error_statistics: empty list");
  const auto median_of = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
  };
  std::vector<double> rot, trans;
  double rot_sum = 0, trans_sum = 0;
  for (const auto& e : errors) {
    rot.push_back(e.rotation_deg);
    trans.push_back(e.translation_mm);
    rot_sum += e.rotation_deg;
    trans_sum += e.translation_mm;
  }
  const double n = static_cast<double>(errors.size());
  return {{rot_sum / n, trans_sum / n}, {median_of(rot), median_of(trans)}};
}

}  // namespace surfpos
