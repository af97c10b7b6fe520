#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "surfpos/geometry.hpp"

namespace surfpos {

/// Static k-d tree over a fixed point set. Every query returns exactly what a
/// linear scan over the points would: distances compare as squared norms,
/// the radius bound is strict and ties go to the lower point index.
class SpatialIndex {
 public:
  static constexpr std::uint32_t kNoLabel = std::numeric_limits<std::uint32_t>::max();

  SpatialIndex() = default;

  /// `labels` is empty or one tag per point; tagged points can be skipped in
  /// nearest-neighbor queries.
  explicit SpatialIndex(std::vector<Point3> points, std::vector<std::uint32_t> labels = {})
      : points_(std::move(points)), labels_(std::move(labels)) {
    if (!labels_.empty() && labels_.size() != points_.size()) {
      throw Error(ErrorKind::InvalidInput, "SpatialIndex: labels size mismatch");
    }
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), std::uint32_t{0});
    axes_.assign(points_.size(), 0);
    build(0, order_.size());
  }

  std::size_t size() const { return points_.size(); }
  const std::vector<Point3>& points() const { return points_; }
  const Point3& point(std::size_t i) const { return points_[i]; }
  std::uint32_t label(std::size_t i) const { return labels_.empty() ? kNoLabel : labels_[i]; }

  struct Hit {
    std::size_t index;
    double squared_distance;
  };

  /// Closest point with ||p - q|| < radius whose label differs from
  /// `exclude_label`.
  std::optional<Hit> nearest(const Point3& p, double radius, std::uint32_t exclude_label = kNoLabel) const {
    Search s{p, radius * radius, exclude_label};
    if (!order_.empty()) search(0, order_.size(), s);
    if (!s.found) return std::nullopt;
    return Hit{s.best_index, s.best_d2};
  }

  /// All points with ||p - q|| < radius, sorted by index.
  std::vector<std::size_t> within(const Point3& p, double radius) const {
    std::vector<std::size_t> out;
    if (!order_.empty()) collect(0, order_.size(), p, radius * radius, out);
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  struct Search {
    Point3 query;
    double bound2;
    std::uint32_t exclude;
    bool found = false;
    std::size_t best_index = 0;
    double best_d2 = 0;
  };

  void build(std::size_t lo, std::size_t hi) {
    if (hi - lo <= 1) return;
    Eigen::Vector3d mn = points_[order_[lo]], mx = mn;
    for (std::size_t i = lo + 1; i < hi; ++i) {
      mn = mn.cwiseMin(points_[order_[i]]);
      mx = mx.cwiseMax(points_[order_[i]]);
    }
    int axis = 0;
    (mx - mn).maxCoeff(&axis);
    const std::size_t mid = lo + (hi - lo) / 2;
    std::nth_element(order_.begin() + lo, order_.begin() + mid, order_.begin() + hi,
                     [&](std::uint32_t a, std::uint32_t b) { return points_[a][axis] < points_[b][axis]; });
    axes_[mid] = static_cast<std::uint8_t>(axis);
    build(lo, mid);
    build(mid + 1, hi);
  }

  void search(std::size_t lo, std::size_t hi, Search& s) const {
    if (lo >= hi) return;
    const std::size_t mid = lo + (hi - lo) / 2;
    const std::uint32_t idx = order_[mid];
    const Point3& q = points_[idx];
    if (label(idx) != s.exclude || s.exclude == kNoLabel) {
      const double d2 = (s.query - q).squaredNorm();
      if (s.found ? (d2 < s.best_d2 || (d2 == s.best_d2 && idx < s.best_index)) : d2 < s.bound2) {
        s.found = true;
        s.best_index = idx;
        s.best_d2 = d2;
      }
    }
    if (hi - lo == 1) return;
    const int axis = axes_[mid];
    const double diff = s.query[axis] - q[axis];
    const bool left_first = diff < 0;
    const auto visit_far = [&] {
      const double d2 = diff * diff;
      return s.found ? d2 <= s.best_d2 : d2 < s.bound2;
    };
    if (left_first) {
      search(lo, mid, s);
      if (visit_far()) search(mid + 1, hi, s);
    } else {
      search(mid + 1, hi, s);
      if (visit_far()) search(lo, mid, s);
    }
  }

  void collect(std::size_t lo, std::size_t hi, const Point3& p, double r2, std::vector<std::size_t>& out) const {
    if (lo >= hi) return;
    const std::size_t mid = lo + (hi - lo) / 2;
    const std::uint32_t idx = order_[mid];
    const Point3& q = points_[idx];
    if ((p - q).squaredNorm() < r2) out.push_back(idx);
    if (hi - lo == 1) return;
    const double diff = p[axes_[mid]] - q[axes_[mid]];
    if (diff < 0 || diff * diff < r2) collect(lo, mid, p, r2, out);
    if (diff >= 0 || diff * diff < r2) collect(mid + 1, hi, p, r2, out);
  }

  std::vector<Point3> points_;
  std::vector<std::uint32_t> labels_;
  std::vector<std::uint32_t> order_;
  std::vector<std::uint8_t> axes_;
};

inline SpatialIndex build_index(const PointCloud& cloud) { return SpatialIndex(cloud.points); }

}  // namespace surfpos
