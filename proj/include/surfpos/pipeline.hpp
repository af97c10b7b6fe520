#pragma once

#include <chrono>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "surfpos/compare.hpp"
#include "surfpos/global_icp.hpp"
#include "surfpos/heightmap.hpp"
#include "surfpos/markers.hpp"
#include "surfpos/scene.hpp"

namespace surfpos {

struct PipelineConfig {
  IcpConfig icp;
  int corner_window = 11;  // px
  HeightMapParams heightmap;
  std::optional<int> reference_marker;  // lowest id in the reference scene when unset
  std::optional<double> segment_floor;  // hide cells below this height in visual outputs

  void validate() const {
    icp.validate();
    heightmap.validate();
    if (corner_window < 1 || corner_window % 2 == 0) {
      throw Error(ErrorKind::InvalidInput, "corner window must be odd and >= 1");
    }
  }
};

/// Stage names of the timing report, in report order.
inline const std::vector<std::string>& timing_stage_names() {
  static const std::vector<std::string> names{
      "Extracting Pointclouds", "Global ICP", "Finding 3D Corner Positions",
      "Scene Alignment", "Heightmap Creation", "Error Map and Overlay Creation"};
  return names;
}

class TimingReport {
 public:
  TimingReport() : seconds_(timing_stage_names().size(), 0.0) {}

  void add(const std::string& stage, double seconds) {
    for (std::size_t i = 0; i < seconds_.size(); ++i) {
      if (timing_stage_names()[i] == stage) {
        seconds_[i] += seconds;
        return;
      }
    }
    throw Error(ErrorKind::InvalidInput, "unknown timing stage: " + stage);
  }

  double seconds(std::size_t i) const { return seconds_[i]; }
  double total() const {
    double t = 0;
    for (double s : seconds_) t += s;
    return t;
  }

 private:
  std::vector<double> seconds_;
};

/// Runs `fn` as pipeline stage `stage`: adds its wall time to `timing` and
/// tags library errors with the stage name.
template <typename Fn>
auto run_stage(const std::string& stage, TimingReport* timing, Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  const auto finish = [&] {
    if (timing) {
      timing->add(stage, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    }
  };
  try {
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      finish();
    } else {
      auto result = fn();
      finish();
      return result;
    }
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e);
  }
}

/// One scene after cloud extraction, Global ICP and corner lifting.
struct SceneReconstruction {
  std::vector<PointCloud> clouds;  // refined, scene frame
  std::vector<RigidTransform> refinements;
  SceneMarkerCorners corners;
};

inline SceneReconstruction reconstruct_scene(const Scene& scene, const PipelineConfig& cfg,
                                             TimingReport* timing = nullptr) {
  SceneReconstruction out;
  const auto clouds = run_stage("Extracting Pointclouds", timing, [&] {
    scene.intrinsics.validate();
    return scene_clouds(scene);
  });
  out.refinements = run_stage("Global ICP", timing, [&] { return global_icp(clouds, cfg.icp); });
  out.clouds = run_stage("Global ICP", timing, [&] { return apply_refinement(clouds, out.refinements); });
  out.corners = run_stage("Finding 3D Corner Positions", timing,
                          [&] { return scene_corners(scene, out.refinements, cfg.corner_window); });
  return out;
}

inline int choose_reference_marker(const SceneMarkerCorners& reference, const PipelineConfig& cfg) {
  if (cfg.reference_marker) return *cfg.reference_marker;
  if (reference.empty()) throw Error(ErrorKind::MissingMarker, "reference scene has no markers");
  return reference.begin()->first;
}

/// Merged heightmap of clouds given in scene coordinates, after moving them
/// with `scene_to_marker`.
inline HeightMap scene_heightmap(const std::vector<PointCloud>& clouds, const RigidTransform& scene_to_marker,
                                 const HeightMapParams& params) {
  std::vector<HeightMap> maps;
  maps.reserve(clouds.size());
  for (const auto& c : clouds) maps.push_back(build_keyframe_heightmap(transform_cloud(c, scene_to_marker), params));
  if (maps.empty()) return HeightMap(params);
  return merge_heightmaps(maps);
}

struct PipelineResult {
  SceneReconstruction reference;
  std::optional<SceneReconstruction> current;
  std::optional<RigidTransform> alignment;  // current scene -> reference scene
  int reference_marker = 0;
  RigidTransform reference_to_marker;
  HeightMap reference_heightmap;
  std::optional<HeightMap> current_heightmap;
  std::optional<RgbImage> error_image;
  std::optional<RgbImage> overlay_image;
  TimingReport timing;
};

/// Full comparison of a current scan against the reference scan. Without a
/// current scene only the reference heightmap is produced.
inline PipelineResult run_pipeline(const Scene& reference, const Scene* current, const PipelineConfig& cfg,
                                   const WarningSink& warn = warn_stderr) {
  cfg.validate();
  PipelineResult r;
  r.reference = reconstruct_scene(reference, cfg, &r.timing);
  if (current) {
    r.current = reconstruct_scene(*current, cfg, &r.timing);
    r.alignment = run_stage("Scene Alignment", &r.timing,
                            [&] { return align_scene(r.current->corners, r.reference.corners, warn); });
  }
  run_stage("Heightmap Creation", &r.timing, [&] {
    r.reference_marker = choose_reference_marker(r.reference.corners, cfg);
    r.reference_to_marker =
        reference_marker_transform(r.reference.corners, r.reference_marker, cfg.heightmap.marker_side);
    r.reference_heightmap = scene_heightmap(r.reference.clouds, r.reference_to_marker, cfg.heightmap);
    if (r.current) {
      r.current_heightmap =
          scene_heightmap(r.current->clouds, compose(r.reference_to_marker, *r.alignment), cfg.heightmap);
    }
  });
  if (r.current) {
    run_stage("Error Map and Overlay Creation", &r.timing, [&] {
      const double cut = cfg.segment_floor.value_or(-std::numeric_limits<double>::infinity());
      r.error_image = error_map(r.reference_heightmap, *r.current_heightmap);
      r.overlay_image = overlay(r.reference_heightmap, *r.current_heightmap, cut);
    });
  }
  return r;
}

/// Marker-based alignment only (no heightmaps): what pose evaluation needs.
inline RigidTransform estimate_alignment(const Scene& reference, const Scene& current, const PipelineConfig& cfg,
                                         const WarningSink& warn = {}) {
  cfg.validate();
  const auto ref = reconstruct_scene(reference, cfg);
  const auto cur = reconstruct_scene(current, cfg);
  return run_stage("Scene Alignment", nullptr, [&] { return align_scene(cur.corners, ref.corners, warn); });
}

}  // namespace surfpos
