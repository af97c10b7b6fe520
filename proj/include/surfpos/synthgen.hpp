#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <vector>

#include "surfpos/global_icp.hpp"
#include "surfpos/heightmap.hpp"
#include "surfpos/scene.hpp"

// Synthetic stand-in for a handheld RGB-D scan of a patient lying on a floor
// with fixed square markers. Every session's coordinate frame is anchored to
// the body (the operator scans along the patient), so the transform taking a
// current session onto the reference session equals the body displacement.

namespace surfpos::synth {

/// Torso-like height field over the body frame's floor plane: a capsule
/// footprint with superelliptic cross-section plus one off-center bulge.
struct BodyModel {
  double length = 0.70;        // along x, m
  double half_width = 0.18;    // along y, m
  double amplitude = 0.17;     // peak torso height, m
  double exponent = 2.5;       // superellipse exponent, >= 2
  double bump_amplitude = 0.05;
  double bump_x = 0.22;
  double bump_y = 0.07;
  double bump_radius = 0.12;

  /// Surface height at (x, y) in the body frame; 0 on the bare floor.
  double height(double x, double y) const {
    double h = 0;
    const double u = std::abs(y) / half_width;
    const double v = std::max(0.0, std::abs(x) - (length / 2 - half_width)) / half_width;
    if (u < 1 && v < 1) h = amplitude * std::max(0.0, 1.0 - power(u) - power(v));
    const double r2 = ((x - bump_x) * (x - bump_x) + (y - bump_y) * (y - bump_y)) / (bump_radius * bump_radius);
    if (r2 < 1) h += bump_amplitude * (1 - r2) * (1 - r2);
    return h;
  }

  double power(double u) const { return exponent == 2.5 ? u * u * std::sqrt(u) : std::pow(u, exponent); }

  double max_height() const { return amplitude + bump_amplitude; }

  /// Upper bound on |grad height|.
  double slope_bound() const { return amplitude * exponent / half_width + 1.6 * bump_amplitude / bump_radius; }

  double reach_x() const { return std::max(length / 2, std::abs(bump_x) + bump_radius); }
  double reach_y() const { return std::max(half_width, std::abs(bump_y) + bump_radius); }
};

struct SyntheticMarker {
  int id = 0;
  double x = 0, y = 0;  // center on the floor, m
  double yaw = 0;       // rad
  double side = 0.104;  // m
};

/// Floor-frame position of corner l (canonical order) of `m`.
inline Point3 marker_corner(const SyntheticMarker& m, int l) {
  return transform_point(canonical_marker_corner(l, m.side), RigidTransform::rot_z(m.yaw, {m.x, m.y, 0.0}));
}

struct NoiseModel {
  double depth_sigma = 0;     // m
  double dropout = 0;         // per-pixel probability
  double rot_sigma_deg = 0;   // reported pose perturbation
  double trans_sigma = 0;     // m
  double pixel_sigma = 0;     // corner detection noise, px
};

struct SyntheticSceneSpec {
  BodyModel body;
  RigidTransform body_pose;  // body frame -> floor frame; must keep the body on the floor
  std::vector<SyntheticMarker> markers;
  std::vector<RigidTransform> camera_path;  // camera-to-session (body frame)
  CameraIntrinsics intrinsics;
  NoiseModel noise;
  std::uint64_t seed = 0;

  void validate() const {
    intrinsics.validate();
    if (camera_path.empty()) throw Error(ErrorKind::InvalidInput, "synth: camera path is empty");
    for (const auto& m : markers) {
      if (!(m.side > 0)) throw Error(ErrorKind::InvalidInput, "synth: marker side must be > 0");
    }
    if (!(noise.dropout >= 0 && noise.dropout <= 1)) throw Error(ErrorKind::InvalidInput, "synth: dropout must be in [0, 1]");
    if (noise.depth_sigma < 0 || noise.rot_sigma_deg < 0 || noise.trans_sigma < 0 || noise.pixel_sigma < 0) {
      throw Error(ErrorKind::InvalidInput, "synth: noise sigmas must be >= 0");
    }
    const Eigen::Matrix3d& r = body_pose.rotation();
    if (std::abs(r(2, 2) - 1) > 1e-12 || std::abs(body_pose.translation().z()) > 1e-12) {
      throw Error(ErrorKind::InvalidInput, "synth: body pose must be a planar motion (rotation about z, no lift)");
    }
  }
};

/// Straight-down camera at (x, y, height) with the image x axis pointing
/// along `yaw` in the floor plane.
inline RigidTransform downward_camera(double x, double y, double height, double yaw) {
  const double c = std::cos(yaw), s = std::sin(yaw);
  Eigen::Matrix3d r;
  // columns: camera x, y, z axes in the world
  r << c, s, 0, s, -c, 0, 0, 0, -1;
  return {r, Eigen::Vector3d(x, y, height)};
}

/// Sweep over the body from one end to the other with lateral and height
/// variation; heights are whole millimeters.
inline std::vector<RigidTransform> default_camera_path(int count = 15) {
  static constexpr double kLateral[] = {-0.15, 0.15};
  static constexpr double kHeight[] = {0.70, 0.73, 0.66, 0.75, 0.68};
  static constexpr double kYawDeg[] = {-8, 4, 10, -4, 6};
  std::vector<RigidTransform> path;
  for (int i = 0; i < count; ++i) {
    const double x = count == 1 ? 0.0 : -0.42 + 0.84 * i / (count - 1);
    path.push_back(downward_camera(x, kLateral[i % 2], kHeight[i % 5], deg_to_rad(90 + kYawDeg[i % 5])));
  }
  return path;
}

/// Four markers around the body; marker 0 sits at the foot-side corner so the
/// body falls inside the default heightmap crop of its frame.
inline std::vector<SyntheticMarker> default_markers(double side = 0.104) {
  return {{0, -0.45, -0.34, 0.0, side},
          {1, 0.15, -0.34, 0.25, side},
          {2, 0.45, 0.34, -0.4, side},
          {3, -0.15, 0.34, 0.6, side}};
}

inline CameraIntrinsics default_intrinsics() { return {285.0, 285.0, 159.5, 119.5, 320, 240}; }

inline SyntheticSceneSpec default_spec(std::uint64_t seed = 0) {
  SyntheticSceneSpec spec;
  spec.markers = default_markers();
  spec.camera_path = default_camera_path();
  spec.intrinsics = default_intrinsics();
  spec.seed = seed;
  return spec;
}

/// Camera pose in the floor frame for keyframe `index`.
inline RigidTransform camera_in_floor(const SyntheticSceneSpec& spec, std::size_t index) {
  return compose(spec.body_pose, spec.camera_path.at(index));
}

/// Noiseless jittered-grid sampling of the body surface: one point per
/// `spacing` x `spacing` floor cell over the body's bounding box widened by
/// `margin` (bare floor included there).
inline PointCloud sample_surface(const BodyModel& body, double spacing, double margin, std::uint64_t seed) {
  if (!(spacing > 0) || margin < 0) throw Error(ErrorKind::InvalidInput, "sample_surface: need spacing > 0, margin >= 0");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double x0 = -body.reach_x() - margin, y0 = -body.reach_y() - margin;
  const int nx = static_cast<int>(std::ceil(2 * (body.reach_x() + margin) / spacing));
  const int ny = static_cast<int>(std::ceil(2 * (body.reach_y() + margin) / spacing));
  PointCloud cloud;
  cloud.points.reserve(static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const double x = x0 + (i + unit(rng)) * spacing;
      const double y = y0 + (j + unit(rng)) * spacing;
      cloud.points.emplace_back(x, y, body.height(x, y));
    }
  }
  return cloud;
}

/// Depth along a camera ray. `origin` and `dir` are in the body frame and
/// `dir` has unit camera-z component, so the returned parameter is the depth.
/// Returns nullopt when the ray never reaches the floor.
inline std::optional<double> cast_ray(const BodyModel& body, const Point3& origin, const Point3& dir) {
  if (!(dir.z() < 0) || !(origin.z() > 0)) return std::nullopt;
  const double down = -dir.z();
  const double floor_hit = origin.z() / down;
  const double top = std::max(0.0, (origin.z() - body.max_height()) / down);

  // Clip the ray against the body's bounding box in the floor plane.
  double lo = top, hi = floor_hit;
  const double bounds[2] = {body.reach_x(), body.reach_y()};
  for (int axis = 0; axis < 2; ++axis) {
    const double o = origin[axis], d = dir[axis], b = bounds[axis];
    if (d == 0) {
      if (o <= -b || o >= b) return floor_hit;
      continue;
    }
    double t0 = (-b - o) / d, t1 = (b - o) / d;
    if (t0 > t1) std::swap(t0, t1);
    lo = std::max(lo, t0);
    hi = std::min(hi, t1);
  }
  if (lo >= hi) return floor_hit;

  const auto gap = [&](double t) {
    return origin.z() + t * dir.z() - body.height(origin.x() + t * dir.x(), origin.y() + t * dir.y());
  };
  const double lipschitz = down + body.slope_bound() * std::hypot(dir.x(), dir.y());
  constexpr double kMinStep = 2e-4;

  double t = lo;
  double g = gap(t);
  if (g <= 0) return t;
  while (t < hi) {
    const double next = std::min(hi, t + std::max(g / lipschitz, kMinStep));
    const double gn = gap(next);
    if (gn <= 0) {
      double a = t, b = next;
      for (int it = 0; it < 200 && b - a > 1e-14; ++it) {
        const double m = 0.5 * (a + b);
        (gap(m) > 0 ? a : b) = m;
      }
      return b;
    }
    t = next;
    g = gn;
  }
  // Left the box above the surface: the floor outside it is flat.
  return floor_hit;
}

inline Point3 ray_direction(const Pixel& q, const CameraIntrinsics& k) {
  return {(q.x() - k.cx) / k.fx, (q.y() - k.cy) / k.fy, 1.0};
}

/// Renders keyframe `index` as seen through `k`. The keyframe carries the
/// exact camera-to-session pose; pose noise is added separately.
inline DepthKeyframe render_depth(const SyntheticSceneSpec& spec, std::size_t index, const CameraIntrinsics& k) {
  spec.validate();
  k.validate();
  if (index >= spec.camera_path.size()) {
    throw Error(ErrorKind::InvalidInput, "render_depth: pose index " + std::to_string(index) + " out of range");
  }
  const RigidTransform& cam_body = spec.camera_path[index];  // body frame == session frame
  const Point3 origin = cam_body.translation();

  std::mt19937_64 rng(mix_seed(spec.seed, index));
  std::normal_distribution<double> depth_noise(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  DepthKeyframe kf;
  kf.id = static_cast<int>(index);
  kf.pose = cam_body;
  kf.depth = DepthImage(k.width, k.height);
  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      const Point3 dir = cam_body.rotation() * ray_direction(Pixel(x, y), k);
      const double n = depth_noise(rng);
      const double drop = unit(rng);
      auto depth = cast_ray(spec.body, origin, dir);
      if (!depth || drop < spec.noise.dropout) continue;
      const double d = *depth + spec.noise.depth_sigma * n;
      if (d > 0) kf.depth.at(x, y) = d;
    }
  }

  const RigidTransform floor_to_body = invert(spec.body_pose);
  const RigidTransform world_to_cam = invert(cam_body);
  std::normal_distribution<double> pixel_noise(0.0, spec.noise.pixel_sigma > 0 ? spec.noise.pixel_sigma : 1.0);
  for (const auto& m : spec.markers) {
    MarkerObservation obs;
    obs.marker_id = m.id;
    bool visible = (origin - transform_point(Point3(m.x, m.y, 0), floor_to_body)).z() > 0;
    for (int l = 0; l < 4; ++l) {
      const Point3 corner = transform_point(marker_corner(m, l), floor_to_body);
      const Point3 local = transform_point(corner, world_to_cam);
      double nx = pixel_noise(rng), ny = pixel_noise(rng);
      if (spec.noise.pixel_sigma == 0) nx = ny = 0;
      if (!(local.z() > 0)) {
        visible = false;
        continue;
      }
      const Pixel exact = project(local, k);
      const Pixel q = exact + Pixel(nx, ny);
      if (!(q.x() >= 0 && q.y() >= 0 && q.x() <= k.width - 1 && q.y() <= k.height - 1)) visible = false;
      // Hidden behind the body?
      const auto hit = cast_ray(spec.body, origin, cam_body.rotation() * ray_direction(exact, k));
      if (!hit || std::abs(*hit - local.z()) > 1e-6) visible = false;
      obs.corners[l] = q;
    }
    if (visible) kf.markers.push_back(obs);
  }
  return kf;
}

/// Reported poses: each pose moved by a random rotation (uniform axis, angle
/// |N(0, rot_sigma)|) and translation N(0, trans_sigma)^3 in its own frame.
inline std::vector<RigidTransform> perturb_poses(const std::vector<RigidTransform>& poses, double rot_sigma_deg,
                                                 double trans_sigma, std::uint64_t seed) {
  if (rot_sigma_deg < 0 || trans_sigma < 0) throw Error(ErrorKind::InvalidInput, "perturb_poses: sigma must be >= 0");
  if (rot_sigma_deg == 0 && trans_sigma == 0) return poses;
  std::vector<RigidTransform> out;
  out.reserve(poses.size());
  for (std::size_t i = 0; i < poses.size(); ++i) {
    std::mt19937_64 rng(mix_seed(seed, i));
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::Vector3d axis;
    do {
      axis = {gauss(rng), gauss(rng), gauss(rng)};
    } while (axis.norm() < 1e-12);
    const double angle = std::abs(gauss(rng)) * deg_to_rad(rot_sigma_deg);
    const Eigen::Vector3d t(gauss(rng) * trans_sigma, gauss(rng) * trans_sigma, gauss(rng) * trans_sigma);
    out.push_back(compose(poses[i], RigidTransform::from_axis_angle(axis, angle, t)));
  }
  return out;
}

/// Renders every keyframe of `spec` and replaces the poses by their
/// perturbed (reported) versions.
inline Scene render_scene(const SyntheticSceneSpec& spec) {
  Scene scene;
  scene.intrinsics = spec.intrinsics;
  const auto reported = perturb_poses(spec.camera_path, spec.noise.rot_sigma_deg, spec.noise.trans_sigma,
                                      mix_seed(spec.seed, 0x5EED));
  for (std::size_t i = 0; i < spec.camera_path.size(); ++i) {
    DepthKeyframe kf = render_depth(spec, i, spec.intrinsics);
    kf.pose = reported[i];
    scene.keyframes.push_back(std::move(kf));
  }
  return scene;
}

/// Marker corners of `spec` in its session frame.
inline std::map<int, std::array<Point3, 4>> session_marker_corners(const SyntheticSceneSpec& spec) {
  std::map<int, std::array<Point3, 4>> out;
  const RigidTransform floor_to_body = invert(spec.body_pose);
  for (const auto& m : spec.markers) {
    for (int l = 0; l < 4; ++l) out[m.id][l] = transform_point(marker_corner(m, l), floor_to_body);
  }
  return out;
}

struct GroundTruth {
  /// Maps current-session coordinates onto reference-session coordinates;
  /// equals the body displacement expressed in the reference body frame.
  RigidTransform displacement;
  std::map<int, std::array<Point3, 4>> reference_corners;
  std::map<int, std::array<Point3, 4>> current_corners;
  std::vector<RigidTransform> reference_cameras;
  std::vector<RigidTransform> current_cameras;
};

struct SyntheticPair {
  SyntheticSceneSpec reference_spec;
  SyntheticSceneSpec current_spec;
  Scene reference;
  Scene current;
  GroundTruth truth;
};

/// Reference and current scans of the same setup where only the body pose
/// differs, by `displacement` applied in the body frame. The two scans use
/// independent noise streams.
inline SyntheticPair make_pair(const SyntheticSceneSpec& spec, const RigidTransform& displacement) {
  SyntheticPair pair;
  pair.reference_spec = spec;
  pair.reference_spec.seed = mix_seed(spec.seed, 1);
  pair.current_spec = spec;
  pair.current_spec.body_pose = compose(spec.body_pose, displacement);
  pair.current_spec.seed = mix_seed(spec.seed, 2);
  pair.reference_spec.validate();
  pair.current_spec.validate();

  pair.reference = render_scene(pair.reference_spec);
  pair.current = render_scene(pair.current_spec);
  pair.truth.displacement = compose(invert(pair.reference_spec.body_pose), pair.current_spec.body_pose);
  pair.truth.reference_corners = session_marker_corners(pair.reference_spec);
  pair.truth.current_corners = session_marker_corners(pair.current_spec);
  pair.truth.reference_cameras = spec.camera_path;
  pair.truth.current_cameras = spec.camera_path;
  return pair;
}

}  // namespace surfpos::synth
