#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "surfpos/horn.hpp"
#include "surfpos/poisson.hpp"
#include "surfpos/spatial_index.hpp"

namespace surfpos {

struct IcpConfig {
  int iterations = 20;
  double r_min = 0.005;             // m
  double r_max = 0.05;              // m
  double subsample_radius = 0.02;   // m
  std::uint64_t rng_seed = 0;

  void validate() const {
    if (iterations < 1) throw Error(ErrorKind::InvalidInput, "IcpConfig: iterations must be >= 1");
    if (!(r_min > 0 && r_min <= r_max)) throw Error(ErrorKind::InvalidInput, "IcpConfig: need 0 < r_min <= r_max");
    if (!(subsample_radius > 0)) throw Error(ErrorKind::InvalidInput, "IcpConfig: subsample radius must be > 0");
  }

  /// Correspondence radius of 1-based iteration `k`; decreases linearly from r_max.
  double radius_at(int k) const { return r_max - (k - 1) * ((r_max - r_min) / iterations); }
};

/// Snapshot handed to an observer once per iteration, after the correspondence
/// search and before any cloud moves.
struct IcpIterationTrace {
  int iteration;  // 1-based
  double radius;
  const std::vector<PointCloud>& clouds;  // subsampled, current positions
  const std::vector<CorrespondenceSet>& correspondences;
};

using IcpObserver = std::function<void(const IcpIterationTrace&)>;

/// splitmix64 step; derives independent per-item seeds from one seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// The Poisson-disk subsampled clouds global_icp iterates on. Every cloud
/// uses the same seed, so identical clouds get identical samples.
inline std::vector<PointCloud> icp_subsample(const std::vector<PointCloud>& clouds, const IcpConfig& cfg) {
  std::vector<PointCloud> out;
  out.reserve(clouds.size());
  for (const auto& c : clouds) out.push_back(poisson_subsample(c, cfg.subsample_radius, cfg.rng_seed));
  return out;
}

/// For each point of each cloud, its nearest neighbor among all other clouds
/// closer than `radius`. Result j holds the pairs found for cloud j.
inline std::vector<CorrespondenceSet> find_correspondences(const std::vector<PointCloud>& clouds, double radius) {
  std::vector<Point3> all;
  std::vector<std::uint32_t> labels;
  for (std::size_t j = 0; j < clouds.size(); ++j) {
    all.insert(all.end(), clouds[j].points.begin(), clouds[j].points.end());
    labels.insert(labels.end(), clouds[j].points.size(), static_cast<std::uint32_t>(j));
  }
  const SpatialIndex index(std::move(all), std::move(labels));

  std::vector<CorrespondenceSet> pairs(clouds.size());
  for (std::size_t j = 0; j < clouds.size(); ++j) {
    for (const Point3& p : clouds[j].points) {
      if (auto hit = index.nearest(p, radius, static_cast<std::uint32_t>(j))) {
        pairs[j].push_back({p, index.point(hit->index)});
      }
    }
  }
  return pairs;
}

/// Mean distance of the correspondences find_correspondences would report.
inline double mean_nearest_residual(const std::vector<PointCloud>& clouds, double radius) {
  double sum = 0;
  std::size_t n = 0;
  for (const auto& set : find_correspondences(clouds, radius)) {
    for (const auto& c : set) sum += (c.source - c.target).norm();
    n += set.size();
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

/// Joint refinement of all clouds against each other. Returns one transform
/// per input cloud; applying transform j to cloud j registers it with the rest.
///
/// Each iteration first collects the correspondences of every cloud, then
/// moves every cloud by the rigid fit of its own pairs. A cloud with fewer
/// than 3 usable pairs stays put for that iteration.
inline std::vector<RigidTransform> global_icp(const std::vector<PointCloud>& clouds, const IcpConfig& cfg,
                                              const IcpObserver& observer = {}) {
  cfg.validate();
  std::vector<RigidTransform> transforms(clouds.size());
  std::vector<PointCloud> sampled = icp_subsample(clouds, cfg);

  for (int k = 1; k <= cfg.iterations; ++k) {
    const double radius = cfg.radius_at(k);
    const std::vector<CorrespondenceSet> pairs = find_correspondences(sampled, radius);
    if (observer) observer(IcpIterationTrace{k, radius, sampled, pairs});

    for (std::size_t j = 0; j < sampled.size(); ++j) {
      if (pairs[j].size() < 3) continue;
      RigidTransform step;
      try {
        step = find_transform(pairs[j]);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::DegenerateGeometry) throw;
        continue;
      }
      transforms[j] = compose(step, transforms[j]);
      sampled[j] = transform_cloud(sampled[j], step);
    }
  }
  return transforms;
}

inline std::vector<PointCloud> apply_refinement(const std::vector<PointCloud>& clouds,
                                                const std::vector<RigidTransform>& transforms) {
  if (clouds.size() != transforms.size()) {
    throw Error(ErrorKind::InvalidInput, "apply_refinement: clouds and transforms differ in length");
  }
  std::vector<PointCloud> out;
  out.reserve(clouds.size());
  for (std::size_t j = 0; j < clouds.size(); ++j) out.push_back(transform_cloud(clouds[j], transforms[j]));
  return out;
}

}  // namespace surfpos
