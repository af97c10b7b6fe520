#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "surfpos/horn.hpp"
#include "surfpos/markers.hpp"

namespace surfpos {

struct HeightMapParams {
  double step = 0.0015;       // grid step, m
  double x_min = -0.1, x_max = 2.0;
  double y_min = -0.2, y_max = 1.0;
  double thickness = 0.03;    // top-surface band, m
  double marker_side = 0.104;

  void validate() const {
    if (!(step > 0) || !(x_min < x_max) || !(y_min < y_max) || !(thickness > 0) || !(marker_side > 0)) {
      throw Error(ErrorKind::InvalidInput, "HeightMapParams: need step, thickness, marker side > 0 and min < max");
    }
  }

  static int cells_along(double lo, double hi, double step) {
    const double n = (hi - lo) / step;
    // (2.0 - -0.1) / 0.0015 evaluates to 1400.0000000000002; treat that as 1400.
    return std::max(1, static_cast<int>(std::ceil(n - 1e-9 * std::max(1.0, n))));
  }
  int cols() const { return cells_along(x_min, x_max, step); }
  int rows() const { return cells_along(y_min, y_max, step); }

  friend bool operator==(const HeightMapParams&, const HeightMapParams&) = default;
};

/// Grid of mean top-surface heights; NaN marks cells no point fell into.
/// Cell (a, b) covers x in [x_min + a*step, ...) and y in [y_min + b*step, ...).
class HeightMap {
 public:
  HeightMap() = default;
  explicit HeightMap(const HeightMapParams& params)
      : params_(params), cols_(params.cols()), rows_(params.rows()),
        cells_(static_cast<std::size_t>(cols_) * rows_, std::numeric_limits<double>::quiet_NaN()) {}

  const HeightMapParams& params() const { return params_; }
  int cols() const { return cols_; }
  int rows() const { return rows_; }

  double at(int a, int b) const { return cells_[index(a, b)]; }
  double& at(int a, int b) { return cells_[index(a, b)]; }
  bool defined(int a, int b) const { return !std::isnan(at(a, b)); }

  std::size_t defined_count() const {
    return static_cast<std::size_t>(std::count_if(cells_.begin(), cells_.end(), [](double v) { return !std::isnan(v); }));
  }

  const std::vector<double>& cells() const { return cells_; }
  std::vector<double>& cells() { return cells_; }

 private:
  std::size_t index(int a, int b) const { return static_cast<std::size_t>(b) * cols_ + a; }

  HeightMapParams params_;
  int cols_ = 0;
  int rows_ = 0;
  std::vector<double> cells_;
};

/// Canonical corner l of a marker with side `side`, in the marker frame.
inline Point3 canonical_marker_corner(int l, double side) {
  static constexpr std::array<std::array<double, 2>, 4> kSigns{{{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}};
  return {kSigns[l][0] * side / 2, kSigns[l][1] * side / 2, 0.0};
}

/// Transform from scene coordinates into the frame of marker `marker_id`
/// (origin at its center, z along its normal).
inline RigidTransform reference_marker_transform(const SceneMarkerCorners& corners, int marker_id, double side) {
  auto it = corners.find(marker_id);
  if (it == corners.end()) {
    throw Error(ErrorKind::MissingMarker, "reference marker " + std::to_string(marker_id) + " not found in scene");
  }
  CorrespondenceSet pairs;
  for (int l = 0; l < 4; ++l) {
    if (it->second.position[l]) pairs.push_back({*it->second.position[l], canonical_marker_corner(l, side)});
  }
  return find_transform(pairs);
}

/// Heightmap of one cloud already expressed in the reference-marker frame.
/// Per cell, only points within `thickness` of the highest one are averaged.
inline HeightMap build_keyframe_heightmap(const PointCloud& cloud, const HeightMapParams& params) {
  params.validate();
  HeightMap map(params);
  const int cols = map.cols(), rows = map.rows();
  const std::size_t n = static_cast<std::size_t>(cols) * rows;

  std::vector<std::int32_t> cell_of(cloud.size(), -1);
  std::vector<double> zmax(n, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Point3& p = cloud.points[i];
    if (!(p.x() >= params.x_min && p.x() <= params.x_max && p.y() >= params.y_min && p.y() <= params.y_max)) continue;
    const int a = std::clamp(static_cast<int>(std::floor((p.x() - params.x_min) / params.step)), 0, cols - 1);
    const int b = std::clamp(static_cast<int>(std::floor((p.y() - params.y_min) / params.step)), 0, rows - 1);
    const auto c = static_cast<std::int32_t>(static_cast<std::size_t>(b) * cols + a);
    cell_of[i] = c;
    zmax[c] = std::max(zmax[c], p.z());
  }

  std::vector<double> sum(n, 0.0);
  std::vector<std::uint32_t> count(n, 0);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const std::int32_t c = cell_of[i];
    if (c < 0) continue;
    const double z = cloud.points[i].z();
    if (zmax[c] - z < params.thickness) {
      sum[c] += z;
      ++count[c];
    }
  }
  auto& cells = map.cells();
  for (std::size_t c = 0; c < n; ++c) {
    if (count[c] > 0) cells[c] = sum[c] / count[c];
  }
  return map;
}

/// Union of the defined cells; shared cells take the mean of their values.
inline HeightMap merge_heightmaps(const std::vector<HeightMap>& maps) {
  if (maps.empty()) throw Error(ErrorKind::InvalidInput, "merge_heightmaps: no maps");
  const HeightMapParams& params = maps.front().params();
  for (const auto& m : maps) {
    if (!(m.params() == params)) throw Error(ErrorKind::ParamsMismatch, "merge_heightmaps: maps use different grids");
  }
  HeightMap out(params);
  const std::size_t n = out.cells().size();
  for (std::size_t c = 0; c < n; ++c) {
    double sum = 0;
    int count = 0;
    for (const auto& m : maps) {
      const double v = m.cells()[c];
      if (!std::isnan(v)) {
        sum += v;
        ++count;
      }
    }
    if (count > 0) out.cells()[c] = sum / count;
  }
  return out;
}

}  // namespace surfpos
