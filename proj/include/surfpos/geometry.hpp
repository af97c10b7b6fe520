#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "surfpos/error.hpp"

namespace surfpos {

using Point3 = Eigen::Vector3d;
using Pixel = Eigen::Vector2d;
using Rgb = std::array<std::uint8_t, 3>;

constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Rigid motion p -> R p + t. Lengths are in meters.
class RigidTransform {
 public:
  RigidTransform() : rotation_(Eigen::Matrix3d::Identity()), translation_(Eigen::Vector3d::Zero()) {}

  /// Throws InvalidInput if `rotation` is not a proper rotation within 1e-9.
  RigidTransform(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation)
      : rotation_(rotation), translation_(translation) {
    if (!is_rotation(rotation) || !translation.allFinite()) {
      throw Error(ErrorKind::InvalidInput, "RigidTransform: rotation is not orthonormal with det +1");
    }
  }

  static RigidTransform identity() { return {}; }

  static RigidTransform from_translation(const Eigen::Vector3d& t) {
    return {Eigen::Matrix3d::Identity(), t};
  }

  static RigidTransform from_axis_angle(const Eigen::Vector3d& axis, double angle_rad,
                                        const Eigen::Vector3d& t = Eigen::Vector3d::Zero()) {
    return {Eigen::AngleAxisd(angle_rad, axis.normalized()).toRotationMatrix(), t};
  }

  /// Rotation about +z by `angle_rad`.
  /// Built entry by entry so the z row and column stay exactly (0, 0, 1).
  static RigidTransform rot_z(double angle_rad, const Eigen::Vector3d& t = Eigen::Vector3d::Zero()) {
    const double c = std::cos(angle_rad), s = std::sin(angle_rad);
    Eigen::Matrix3d r;
    r << c, -s, 0, s, c, 0, 0, 0, 1;
    return {r, t};
  }

  const Eigen::Matrix3d& rotation() const { return rotation_; }
  const Eigen::Vector3d& translation() const { return translation_; }

  Eigen::Matrix4d matrix() const {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = rotation_;
    m.topRightCorner<3, 1>() = translation_;
    return m;
  }

  static bool is_rotation(const Eigen::Matrix3d& r, double tol = 1e-9) {
    if (!r.allFinite()) return false;
    const double ortho = (r.transpose() * r - Eigen::Matrix3d::Identity()).norm();
    const double det = r.determinant();
    return ortho < tol && std::abs(det - 1.0) <= tol;
  }

 private:
  Eigen::Matrix3d rotation_;
  Eigen::Vector3d translation_;
};

struct CameraIntrinsics {
  double fx = 0, fy = 0;
  double cx = 0, cy = 0;
  int width = 0, height = 0;

  void validate() const {
    if (!(fx > 0 && fy > 0) || width <= 0 || height <= 0 || !(cx >= 0 && cx < width) ||
        !(cy >= 0 && cy < height)) {
      throw Error(ErrorKind::InvalidInput, "CameraIntrinsics: need fx, fy > 0 and principal point inside the image");
    }
  }

  Eigen::Matrix3d matrix() const {
    Eigen::Matrix3d k;
    k << fx, 0, cx, 0, fy, cy, 0, 0, 1;
    return k;
  }

  friend bool operator==(const CameraIntrinsics&, const CameraIntrinsics&) = default;
};

struct PointCloud {
  std::vector<Point3> points;
  /// Empty, or one color per point.
  std::vector<Rgb> colors;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_colors() const { return !colors.empty(); }
};

/// Lifts pixel `q` at depth `depth` (meters) into the camera frame.
inline Point3 back_project(const Pixel& q, double depth, const CameraIntrinsics& k) {
  if (!(depth > 0) || !std::isfinite(depth)) {
    throw Error(ErrorKind::InvalidInput, "back_project: depth must be positive");
  }
  if (!q.allFinite()) throw Error(ErrorKind::InvalidInput, "back_project: pixel is not finite");
  return {(q.x() - k.cx) / k.fx * depth, (q.y() - k.cy) / k.fy * depth, depth};
}

/// Pinhole projection of a camera-frame point; inverse of back_project.
inline Pixel project(const Point3& p, const CameraIntrinsics& k) {
  return {k.fx * p.x() / p.z() + k.cx, k.fy * p.y() / p.z() + k.cy};
}

inline Point3 transform_point(const Point3& p, const RigidTransform& t) {
  return t.rotation() * p + t.translation();
}

inline PointCloud transform_cloud(const PointCloud& cloud, const RigidTransform& t) {
  PointCloud out;
  out.points.reserve(cloud.points.size());
  for (const auto& p : cloud.points) out.points.push_back(transform_point(p, t));
  out.colors = cloud.colors;
  return out;
}

/// Function composition: the result applies `second` first, then `first`.
inline RigidTransform compose(const RigidTransform& first, const RigidTransform& second) {
  Eigen::Matrix3d r = first.rotation() * second.rotation();
  Eigen::Vector3d t = first.rotation() * second.translation() + first.translation();
  return {r, t};
}

inline RigidTransform invert(const RigidTransform& t) {
  Eigen::Matrix3d rt = t.rotation().transpose();
  return {rt, -(rt * t.translation())};
}

/// Geodesic angle of a rotation matrix, radians in [0, pi].
inline double rotation_angle(const Eigen::Matrix3d& r) {
  const double c = std::clamp((r.trace() - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(c);
}

}  // namespace surfpos
