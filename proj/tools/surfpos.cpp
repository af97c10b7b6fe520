// surfpos: synthetic data generation, scene reconstruction, marker alignment,
// heightmaps and session comparison from the command line.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "surfpos/app.hpp"

namespace fs = std::filesystem;
using namespace surfpos;

namespace {

struct Common {
  std::string config;
  std::string output_dir = ".";
  std::optional<std::uint64_t> seed;

  PipelineConfig pipeline_config() const {
    PipelineConfig cfg = config.empty() ? PipelineConfig{} : read_config(config);
    if (seed) cfg.icp.rng_seed = *seed;
    cfg.validate();
    return cfg;
  }
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "key = value configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--output-dir", c.output_dir, "directory for outputs");
  cmd->add_option("--seed", c.seed, "random seed");
}

void print_pose_error(const RigidTransform& estimate, const fs::path& current_dir) {
  if (auto truth = io::read_ground_truth(current_dir)) {
    const PoseError e = pose_error(estimate, *truth);
    std::printf("rotation error    %.6f deg\ntranslation error %.6f mm\n", e.rotation_deg, e.translation_mm);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Patient surface positioning from RGB-D keyframes and floor markers"};
  app.require_subcommand(1);

  // synth -----------------------------------------------------------------
  Common synth_opts;
  int keyframes = 15;
  double yaw_deg = 5.0;
  std::vector<double> shift{0.05, 0.02, 0.0};
  synth::NoiseModel noise;
  auto* synth_cmd = app.add_subcommand("synth", "render a reference/current dataset pair with known displacement");
  add_common(synth_cmd, synth_opts);
  synth_cmd->add_option("--keyframes", keyframes, "keyframes per scan")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--yaw-deg", yaw_deg, "displacement rotation about the floor normal");
  synth_cmd->add_option("--translation", shift, "displacement x y z in meters")->expected(3);
  synth_cmd->add_option("--depth-sigma", noise.depth_sigma, "depth noise, m");
  synth_cmd->add_option("--dropout", noise.dropout, "pixel dropout probability");
  synth_cmd->add_option("--pixel-sigma", noise.pixel_sigma, "corner detection noise, px");
  synth_cmd->add_option("--pose-rot-deg", noise.rot_sigma_deg, "keyframe pose rotation noise, deg");
  synth_cmd->add_option("--pose-trans", noise.trans_sigma, "keyframe pose translation noise, m");

  // reconstruct -----------------------------------------------------------
  Common rec_opts;
  std::string rec_dataset;
  auto* rec_cmd = app.add_subcommand("reconstruct", "Global ICP and 3D marker corners of one dataset");
  add_common(rec_cmd, rec_opts);
  rec_cmd->add_option("dataset", rec_dataset)->required()->check(CLI::ExistingDirectory);

  // align -----------------------------------------------------------------
  Common align_opts;
  std::string align_ref, align_cur;
  auto* align_cmd = app.add_subcommand("align", "transform taking the current scene onto the reference scene");
  add_common(align_cmd, align_opts);
  align_cmd->add_option("reference", align_ref)->required()->check(CLI::ExistingDirectory);
  align_cmd->add_option("current", align_cur)->required()->check(CLI::ExistingDirectory);

  // heightmap -------------------------------------------------------------
  Common hm_opts;
  std::string hm_dataset;
  auto* hm_cmd = app.add_subcommand("heightmap", "heightmap of one dataset in its reference-marker frame");
  add_common(hm_cmd, hm_opts);
  hm_cmd->add_option("dataset", hm_dataset)->required()->check(CLI::ExistingDirectory);

  // compare ---------------------------------------------------------------
  Common cmp_opts;
  std::string cmp_ref, cmp_cur;
  auto* cmp_cmd = app.add_subcommand("compare", "error map and overlay of two heightmap files");
  add_common(cmp_cmd, cmp_opts);
  cmp_cmd->add_option("reference", cmp_ref)->required()->check(CLI::ExistingFile);
  cmp_cmd->add_option("current", cmp_cur)->required()->check(CLI::ExistingFile);

  // pipeline --------------------------------------------------------------
  Common pipe_opts;
  std::string pipe_ref, pipe_cur, timing_path;
  auto* pipe_cmd = app.add_subcommand("pipeline", "full comparison of a current scan against the reference scan");
  add_common(pipe_cmd, pipe_opts);
  pipe_cmd->add_option("reference", pipe_ref)->required()->check(CLI::ExistingDirectory);
  pipe_cmd->add_option("current", pipe_cur)->check(CLI::ExistingDirectory);
  pipe_cmd->add_option("--timing-report", timing_path, "also write the timing breakdown to this file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth_cmd) {
      auto spec = synth::default_spec(synth_opts.seed.value_or(0));
      spec.camera_path = synth::default_camera_path(keyframes);
      spec.noise = noise;
      const auto displacement =
          RigidTransform::rot_z(deg_to_rad(yaw_deg), Eigen::Vector3d(shift[0], shift[1], shift[2]));
      const auto pair = synth::make_pair(spec, displacement);
      app::write_pair(pair, synth_opts.output_dir);
      std::printf("wrote %s/reference and %s/current\n", synth_opts.output_dir.c_str(), synth_opts.output_dir.c_str());
    } else if (*rec_cmd) {
      const auto cfg = rec_opts.pipeline_config();
      const Scene scene = io::read_dataset(rec_dataset);
      const auto rec = reconstruct_scene(scene, cfg);
      const fs::path out = rec_opts.output_dir;
      io::write_transforms(rec.refinements, out / "refinements.txt");
      io::write_corners(rec.corners, out / "corners.txt");
      io::write_ply(app::merged_cloud(rec.clouds, RigidTransform::identity()), out / "cloud.ply");
    } else if (*align_cmd) {
      const auto cfg = align_opts.pipeline_config();
      const auto t = estimate_alignment(io::read_dataset(align_ref), io::read_dataset(align_cur), cfg, warn_stderr);
      io::write_transform(t, fs::path(align_opts.output_dir) / "alignment.txt");
      std::printf("%s\n", io::transform_fields(t).c_str());
      print_pose_error(t, align_cur);
    } else if (*hm_cmd) {
      const auto cfg = hm_opts.pipeline_config();
      const auto r = run_pipeline(io::read_dataset(hm_dataset), nullptr, cfg);
      const fs::path out = hm_opts.output_dir;
      io::write_heightmap(r.reference_heightmap, out / "heightmap.txt");
      io::write_image(
          heightmap_image(r.reference_heightmap, cfg.segment_floor.value_or(-std::numeric_limits<double>::infinity())),
          out / "heightmap.ppm");
    } else if (*cmp_cmd) {
      const auto cfg = cmp_opts.pipeline_config();
      const HeightMap a = io::read_heightmap(cmp_ref), b = io::read_heightmap(cmp_cur);
      const fs::path out = cmp_opts.output_dir;
      io::write_image(error_map(a, b), out / "error_map.ppm");
      io::write_image(overlay(a, b, cfg.segment_floor.value_or(-std::numeric_limits<double>::infinity())),
                      out / "overlay.ppm");
    } else if (*pipe_cmd) {
      const auto cfg = pipe_opts.pipeline_config();
      std::optional<fs::path> current;
      if (!pipe_cur.empty()) current = pipe_cur;
      const auto r = app::run_pipeline_on_disk(pipe_ref, current, cfg, pipe_opts.output_dir);
      const std::string timing = app::format_timing(r.timing);
      std::cout << timing;
      if (!timing_path.empty()) {
        std::ofstream(timing_path) << timing;
      }
      if (r.alignment && current) print_pose_error(*r.alignment, *current);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
