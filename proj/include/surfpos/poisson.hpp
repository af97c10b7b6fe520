#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <unordered_map>
#include <vector>

#include "surfpos/geometry.hpp"

namespace surfpos {

namespace detail {

inline std::uint64_t cell_key(std::int64_t x, std::int64_t y, std::int64_t z) {
  constexpr std::int64_t kBias = 1 << 20;
  constexpr std::uint64_t kMask = (1u << 21) - 1;
  return (static_cast<std::uint64_t>(x + kBias) & kMask) << 42 |
         (static_cast<std::uint64_t>(y + kBias) & kMask) << 21 |
         (static_cast<std::uint64_t>(z + kBias) & kMask);
}

}  // namespace detail

/// Indices (ascending) of a maximal Poisson-disk subset: retained points are
/// pairwise at least `radius` apart and every rejected point lies closer than
/// `radius` to a retained one. Candidates are visited in a seeded random order.
inline std::vector<std::size_t> poisson_subsample_indices(const std::vector<Point3>& points, double radius,
                                                          std::uint64_t seed) {
  if (radius < 0 || !std::isfinite(radius)) {
    throw Error(ErrorKind::InvalidInput, "poisson_subsample: radius must be >= 0");
  }
  std::vector<std::size_t> all(points.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  if (radius == 0 || points.empty()) return all;

  std::vector<std::size_t> order = all;
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const double cell = radius / std::sqrt(3.0);
  const double r2 = radius * radius;
  std::vector<std::size_t> kept;

  // Cell coordinates relative to the bounding box; a dense head/next list
  // when the box is small, a hash map otherwise.
  Eigen::Vector3d lo = points.front(), hi = points.front();
  for (const auto& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  std::array<std::int64_t, 3> dims{};
  double cells_total = 1;
  for (int a = 0; a < 3; ++a) {
    dims[a] = static_cast<std::int64_t>(std::floor((hi[a] - lo[a]) / cell)) + 1;
    cells_total *= static_cast<double>(dims[a]);
  }
  const bool dense = cells_total <= std::max(4.0 * static_cast<double>(points.size()), double{1 << 22});

  std::vector<std::int32_t> head(dense ? static_cast<std::size_t>(cells_total) : 0, -1);
  std::vector<std::int32_t> next;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> grid;

  const auto visit = [&](std::int64_t x, std::int64_t y, std::int64_t z, const Point3& p) {
    if (dense) {
      if (x < 0 || y < 0 || z < 0 || x >= dims[0] || y >= dims[1] || z >= dims[2]) return false;
      for (std::int32_t k = head[static_cast<std::size_t>((z * dims[1] + y) * dims[0] + x)]; k >= 0; k = next[k]) {
        if ((points[kept[k]] - p).squaredNorm() < r2) return true;
      }
      return false;
    }
    auto it = grid.find(detail::cell_key(x, y, z));
    if (it == grid.end()) return false;
    for (std::uint32_t k : it->second) {
      if ((points[k] - p).squaredNorm() < r2) return true;
    }
    return false;
  };

  for (std::size_t idx : order) {
    const Point3& p = points[idx];
    const auto cx = static_cast<std::int64_t>(std::floor((p.x() - lo.x()) / cell));
    const auto cy = static_cast<std::int64_t>(std::floor((p.y() - lo.y()) / cell));
    const auto cz = static_cast<std::int64_t>(std::floor((p.z() - lo.z()) / cell));

    // The own cell is the common rejection; test it before the neighborhood.
    bool reject = visit(cx, cy, cz, p);
    for (std::int64_t dx = -2; dx <= 2 && !reject; ++dx) {
      for (std::int64_t dy = -2; dy <= 2 && !reject; ++dy) {
        for (std::int64_t dz = -2; dz <= 2 && !reject; ++dz) {
          if (dx == 0 && dy == 0 && dz == 0) continue;
          reject = visit(cx + dx, cy + dy, cz + dz, p);
        }
      }
    }
    if (reject) continue;
    if (dense) {
      auto& h = head[static_cast<std::size_t>((cz * dims[1] + cy) * dims[0] + cx)];
      next.push_back(h);
      h = static_cast<std::int32_t>(kept.size());
    } else {
      grid[detail::cell_key(cx, cy, cz)].push_back(static_cast<std::uint32_t>(idx));
    }
    kept.push_back(idx);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

inline PointCloud select(const PointCloud& cloud, const std::vector<std::size_t>& indices) {
  PointCloud out;
  out.points.reserve(indices.size());
  for (std::size_t i : indices) out.points.push_back(cloud.points[i]);
  if (cloud.has_colors()) {
    out.colors.reserve(indices.size());
    for (std::size_t i : indices) out.colors.push_back(cloud.colors[i]);
  }
  return out;
}

inline PointCloud poisson_subsample(const PointCloud& cloud, double radius, std::uint64_t seed) {
  return select(cloud, poisson_subsample_indices(cloud.points, radius, seed));
}

}  // namespace surfpos
