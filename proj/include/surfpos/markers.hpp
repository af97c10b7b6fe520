#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "surfpos/horn.hpp"
#include "surfpos/scene.hpp"

namespace surfpos {

/// 3D corners of one marker in scene coordinates. support[l] counts the
/// keyframes whose estimate went into corner l.
struct MarkerCorners {
  std::array<std::optional<Point3>, 4> position;
  std::array<int, 4> support{0, 0, 0, 0};
};

using SceneMarkerCorners = std::map<int, MarkerCorners>;

using WarningSink = std::function<void(const std::string&)>;

inline void warn_stderr(const std::string& msg) { std::cerr << "warning: " << msg << '\n'; }

/// Camera-frame 3D position of a detected corner. Uses the depth of the
/// nearest pixel when valid, otherwise the mean back-projection of the valid
/// pixels in the `window` x `window` square around it.
inline std::optional<Point3> corner_3d(const Pixel& corner, const DepthKeyframe& frame, const CameraIntrinsics& k,
                                       int window) {
  if (window < 1 || window % 2 == 0) {
    throw Error(ErrorKind::InvalidInput, "corner_3d: window must be odd and >= 1");
  }
  const DepthImage& img = frame.depth;
  const int cx = static_cast<int>(std::round(corner.x()));
  const int cy = static_cast<int>(std::round(corner.y()));
  if (img.valid(cx, cy)) return back_project(corner, img.at(cx, cy), k);

  const int half = window / 2;
  Point3 sum = Point3::Zero();
  int count = 0;
  for (int y = cy - half; y <= cy + half; ++y) {
    for (int x = cx - half; x <= cx + half; ++x) {
      if (!img.valid(x, y)) continue;
      sum += back_project(Pixel(x, y), img.at(x, y), k);
      ++count;
    }
  }
  if (count == 0) return std::nullopt;
  return sum / count;
}

/// Scene-frame marker corners averaged over every keyframe that produced an
/// estimate. Each keyframe estimate is mapped by its pose, then by its
/// refinement transform.
inline SceneMarkerCorners scene_corners(const Scene& scene, const std::vector<RigidTransform>& refinements,
                                        int window) {
  if (refinements.size() != scene.keyframes.size()) {
    throw Error(ErrorKind::InvalidInput, "scene_corners: one refinement per keyframe required");
  }
  std::map<int, std::array<Point3, 4>> sums;
  SceneMarkerCorners out;
  for (std::size_t j = 0; j < scene.keyframes.size(); ++j) {
    const DepthKeyframe& kf = scene.keyframes[j];
    for (const MarkerObservation& obs : kf.markers) {
      for (int l = 0; l < 4; ++l) {
        auto local = corner_3d(obs.corners[l], kf, scene.intrinsics, window);
        if (!local) continue;
        const Point3 world = transform_point(transform_point(*local, kf.pose), refinements[j]);
        auto [it, inserted] = sums.try_emplace(obs.marker_id);
        if (inserted) it->second.fill(Point3::Zero());
        it->second[l] += world;
        out[obs.marker_id].support[l] += 1;
      }
    }
  }
  for (auto& [id, corners] : out) {
    for (int l = 0; l < 4; ++l) {
      if (corners.support[l] > 0) corners.position[l] = sums[id][l] / corners.support[l];
    }
  }
  return out;
}

/// Correspondences current -> reference over every corner present in both.
inline CorrespondenceSet common_corner_pairs(const SceneMarkerCorners& current, const SceneMarkerCorners& reference,
                                             int* common_markers = nullptr) {
  CorrespondenceSet pairs;
  int common = 0;
  for (const auto& [id, cur] : current) {
    auto it = reference.find(id);
    if (it == reference.end()) continue;
    bool any = false;
    for (int l = 0; l < 4; ++l) {
      if (cur.position[l] && it->second.position[l]) {
        pairs.push_back({*cur.position[l], *it->second.position[l]});
        any = true;
      }
    }
    common += any ? 1 : 0;
  }
  if (common_markers) *common_markers = common;
  return pairs;
}

/// Rigid transform taking the current scene onto the reference scene through
/// the corners of the markers both scenes observed.
inline RigidTransform align_scene(const SceneMarkerCorners& current, const SceneMarkerCorners& reference,
                                  const WarningSink& warn = warn_stderr) {
  int common = 0;
  const CorrespondenceSet pairs = common_corner_pairs(current, reference, &common);
  if (common == 0) throw Error(ErrorKind::NoCommonMarkers, "align_scene: scenes share no marker");
  if (common == 1 && warn) {
    warn("align_scene: only one common marker; out-of-plane rotation is weakly constrained");
  }
  return find_transform(pairs);
}

inline std::vector<PointCloud> apply_alignment(const std::vector<PointCloud>& clouds, const RigidTransform& t) {
  std::vector<PointCloud> out;
  out.reserve(clouds.size());
  for (const auto& c : clouds) out.push_back(transform_cloud(c, t));
  return out;
}

}  // namespace surfpos
