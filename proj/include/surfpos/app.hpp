#pragma once

#include <cstdio>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>

#include "surfpos/config.hpp"
#include "surfpos/io.hpp"
#include "surfpos/pipeline.hpp"
#include "surfpos/synthgen.hpp"

// On-disk entry points used by the command-line tool.

namespace surfpos::app {

namespace fs = std::filesystem;

/// Writes `pair` as <dir>/reference and <dir>/current. The displacement goes
/// to current/ground_truth.txt; exact camera poses to true_poses.txt.
inline void write_pair(const synth::SyntheticPair& pair, const fs::path& dir) {
  io::write_dataset(pair.reference, dir / "reference");
  io::write_dataset(pair.current, dir / "current", pair.truth.displacement);
  io::write_transforms(pair.truth.reference_cameras, dir / "reference" / "true_poses.txt");
  io::write_transforms(pair.truth.current_cameras, dir / "current" / "true_poses.txt");
}

inline std::string format_timing(const TimingReport& timing) {
  std::ostringstream out;
  char buf[128];
  for (std::size_t i = 0; i < timing_stage_names().size(); ++i) {
    std::snprintf(buf, sizeof buf, "%-32s %9.3f s\n", timing_stage_names()[i].c_str(), timing.seconds(i));
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "%-32s %9.3f s\n", "Total", timing.total());
  out << buf;
  return out.str();
}

inline PointCloud merged_cloud(const std::vector<PointCloud>& clouds, const RigidTransform& t) {
  PointCloud out;
  for (const auto& c : clouds) {
    const PointCloud moved = transform_cloud(c, t);
    out.points.insert(out.points.end(), moved.points.begin(), moved.points.end());
  }
  return out;
}

/// Root-mean-square distance between common marker corners after mapping
/// the current ones through `alignment`.
inline double corner_rms(const SceneMarkerCorners& current, const SceneMarkerCorners& reference,
                         const RigidTransform& alignment) {
  const auto pairs = common_corner_pairs(current, reference);
  if (pairs.empty()) return 0;
  return std::sqrt(squared_residual(pairs, alignment) / static_cast<double>(pairs.size()));
}

inline void write_scene_outputs(const SceneReconstruction& scene, const RigidTransform& to_marker,
                                const HeightMap& map, const PipelineConfig& cfg, const fs::path& dir) {
  io::write_transforms(scene.refinements, dir / "refinements.txt");
  io::write_corners(scene.corners, dir / "corners.txt");
  io::write_ply(merged_cloud(scene.clouds, to_marker), dir / "cloud.ply");
  io::write_heightmap(map, dir / "heightmap.txt");
  io::write_image(heightmap_image(map, cfg.segment_floor.value_or(-std::numeric_limits<double>::infinity())),
                  dir / "heightmap.ppm");
}

inline std::string format_metrics(const PipelineResult& r, const std::optional<RigidTransform>& ground_truth) {
  using io::format_double;
  std::ostringstream out;
  out << "reference_marker " << r.reference_marker << '\n'
      << "reference_markers " << r.reference.corners.size() << '\n'
      << "reference_cells_defined " << r.reference_heightmap.defined_count() << '\n';
  if (!r.current) return out.str();

  std::size_t common = 0;
  for (const auto& [id, mc] : r.current->corners) common += r.reference.corners.count(id);
  out << "current_markers " << r.current->corners.size() << '\n'
      << "common_markers " << common << '\n'
      << "alignment " << io::transform_fields(*r.alignment) << '\n'
      << "corner_rms_m " << format_double(corner_rms(r.current->corners, r.reference.corners, *r.alignment)) << '\n'
      << "current_cells_defined " << r.current_heightmap->defined_count() << '\n';

  std::size_t overlap = 0;
  double sum = 0, worst = 0;
  const auto& a = r.reference_heightmap.cells();
  const auto& b = r.current_heightmap->cells();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::isnan(a[i]) || std::isnan(b[i])) continue;
    const double e = std::abs(a[i] - b[i]);
    ++overlap;
    sum += e;
    worst = std::max(worst, e);
  }
  out << "overlap_cells " << overlap << '\n'
      << "height_error_mean_m " << format_double(overlap ? sum / static_cast<double>(overlap) : 0.0) << '\n'
      << "height_error_max_m " << format_double(worst) << '\n';

  if (ground_truth) {
    const PoseError e = pose_error(*r.alignment, *ground_truth);
    out << "ground_truth " << io::transform_fields(*ground_truth) << '\n'
        << "rotation_error_deg " << format_double(e.rotation_deg) << '\n'
        << "translation_error_mm " << format_double(e.translation_mm) << '\n';
  }
  return out.str();
}

/// Writes every pipeline output below `dir`. Timing is not part of the tree,
/// so two runs with the same inputs produce identical files.
inline void write_pipeline_outputs(const PipelineResult& r, const PipelineConfig& cfg,
                                   const std::optional<RigidTransform>& ground_truth, const fs::path& dir) {
  fs::create_directories(dir);
  {
    auto out = io::open_for_write(dir / "config.txt");
    out << format_config(cfg);
    io::finish_write(out, dir / "config.txt");
  }
  write_scene_outputs(r.reference, r.reference_to_marker, r.reference_heightmap, cfg, dir / "reference");
  if (r.current) {
    const RigidTransform cur_to_marker = compose(r.reference_to_marker, *r.alignment);
    write_scene_outputs(*r.current, cur_to_marker, *r.current_heightmap, cfg, dir / "current");
    io::write_transform(*r.alignment, dir / "alignment.txt");
    io::write_image(*r.error_image, dir / "error_map.ppm");
    io::write_image(*r.overlay_image, dir / "overlay.ppm");
  }
  auto out = io::open_for_write(dir / "metrics.txt");
  out << format_metrics(r, ground_truth);
  io::finish_write(out, dir / "metrics.txt");
}

/// Reads the datasets, runs the pipeline and writes its outputs. The
/// current dataset's ground_truth.txt, when present, adds pose errors to the
/// metrics.
inline PipelineResult run_pipeline_on_disk(const fs::path& reference_dir, const std::optional<fs::path>& current_dir,
                                           const PipelineConfig& cfg, const fs::path& out_dir,
                                           const WarningSink& warn = warn_stderr) {
  const Scene reference = io::read_dataset(reference_dir);
  std::optional<Scene> current;
  std::optional<RigidTransform> truth;
  if (current_dir) {
    current = io::read_dataset(*current_dir);
    truth = io::read_ground_truth(*current_dir);
  }
  PipelineResult r = run_pipeline(reference, current ? &*current : nullptr, cfg, warn);
  write_pipeline_outputs(r, cfg, truth, out_dir);
  return r;
}

}  // namespace surfpos::app
