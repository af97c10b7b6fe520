#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "surfpos/geometry.hpp"

namespace surfpos {

/// Depth in meters, row-major; 0 marks a pixel without a valid measurement.
struct DepthImage {
  int width = 0;
  int height = 0;
  std::vector<double> depth;

  DepthImage() = default;
  DepthImage(int w, int h) : width(w), height(h), depth(static_cast<std::size_t>(w) * h, 0.0) {}

  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }
  double at(int x, int y) const { return depth[static_cast<std::size_t>(y) * width + x]; }
  double& at(int x, int y) { return depth[static_cast<std::size_t>(y) * width + x]; }
  bool valid(int x, int y) const {
    if (!contains(x, y)) return false;
    const double d = at(x, y);
    return d > 0 && std::isfinite(d);
  }
};

/// Detected square marker. Corners follow the canonical marker-frame order
/// (-l/2,-l/2), (l/2,-l/2), (l/2,l/2), (-l/2,l/2).
struct MarkerObservation {
  int marker_id = 0;
  std::array<Pixel, 4> corners;
};

struct DepthKeyframe {
  int id = 0;
  DepthImage depth;
  RigidTransform pose;  // camera-to-world
  std::vector<MarkerObservation> markers;
};

struct Scene {
  CameraIntrinsics intrinsics;
  std::vector<DepthKeyframe> keyframes;
};

/// Back-projection of every valid pixel, in the camera frame.
inline PointCloud keyframe_cloud(const DepthKeyframe& frame, const CameraIntrinsics& k) {
  PointCloud cloud;
  const DepthImage& img = frame.depth;
  cloud.points.reserve(img.depth.size());
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      if (img.valid(x, y)) cloud.points.push_back(back_project(Pixel(x, y), img.at(x, y), k));
    }
  }
  return cloud;
}

/// Per-keyframe clouds placed in the scene frame by their camera poses.
inline std::vector<PointCloud> scene_clouds(const Scene& scene) {
  std::vector<PointCloud> clouds;
  clouds.reserve(scene.keyframes.size());
  for (const auto& kf : scene.keyframes) {
    clouds.push_back(transform_cloud(keyframe_cloud(kf, scene.intrinsics), kf.pose));
  }
  return clouds;
}

}  // namespace surfpos
