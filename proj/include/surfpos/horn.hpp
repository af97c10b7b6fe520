#pragma once

#include <vector>

#include <Eigen/Eigenvalues>

#include "surfpos/geometry.hpp"

namespace surfpos {

struct Correspondence {
  Point3 source;
  Point3 target;
};

using CorrespondenceSet = std::vector<Correspondence>;

/// Rotation from a unit quaternion (w, x, y, z).
inline Eigen::Matrix3d quaternion_to_rotation(const Eigen::Vector4d& q) {
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  Eigen::Matrix3d r;
  r << w * w + x * x - y * y - z * z, 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (y * x + w * z), w * w - x * x + y * y - z * z, 2 * (y * z - w * x),
      2 * (z * x - w * y), 2 * (z * y + w * x), w * w - x * x - y * y + z * z;
  return r;
}

/// Least-squares rigid transform (unit scale) taking every source onto its
/// target, by Horn's closed-form unit-quaternion solution.
///
/// Throws InsufficientCorrespondences for fewer than 3 pairs and
/// DegenerateGeometry when the sources are coincident or collinear, or the
/// optimal rotation is not unique.
inline RigidTransform find_transform(const CorrespondenceSet& pairs) {
  if (pairs.size() < 3) {
    throw Error(ErrorKind::InsufficientCorrespondences,
                "find_transform needs at least 3 pairs, got " + std::to_string(pairs.size()));
  }
  const double n = static_cast<double>(pairs.size());
  Point3 src_mean = Point3::Zero(), dst_mean = Point3::Zero();
  for (const auto& c : pairs) {
    if (!c.source.allFinite() || !c.target.allFinite()) {
      throw Error(ErrorKind::InvalidInput, "find_transform: non-finite coordinate");
    }
    src_mean += c.source;
    dst_mean += c.target;
  }
  src_mean /= n;
  dst_mean /= n;

  Eigen::Matrix3d cross = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
  for (const auto& c : pairs) {
    const Point3 s = c.source - src_mean;
    const Point3 d = c.target - dst_mean;
    cross += s * d.transpose();
    scatter += s * s.transpose();
  }

  // Sources must span at least a plane.
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> spread(scatter, Eigen::EigenvaluesOnly);
  const Eigen::Vector3d ev = spread.eigenvalues();  // ascending
  if (!(ev[2] > 0) || ev[1] <= 1e-12 * ev[2]) {
    throw Error(ErrorKind::DegenerateGeometry, "find_transform: source points are coincident or collinear");
  }

  const double sxx = cross(0, 0), sxy = cross(0, 1), sxz = cross(0, 2);
  const double syx = cross(1, 0), syy = cross(1, 1), syz = cross(1, 2);
  const double szx = cross(2, 0), szy = cross(2, 1), szz = cross(2, 2);
  Eigen::Matrix4d nm;
  nm << sxx + syy + szz, syz - szy, szx - sxz, sxy - syx,
      syz - szy, sxx - syy - szz, sxy + syx, szx + sxz,
      szx - sxz, sxy + syx, -sxx + syy - szz, syz + szy,
      sxy - syx, szx + sxz, syz + szy, -sxx - syy + szz;

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(nm);
  const Eigen::Vector4d lambda = eig.eigenvalues();
  const double scale = std::max(lambda.cwiseAbs().maxCoeff(), 1e-300);
  if (lambda[3] - lambda[2] <= 1e-12 * scale) {
    throw Error(ErrorKind::DegenerateGeometry, "find_transform: optimal rotation is not unique");
  }
  Eigen::Vector4d q = eig.eigenvectors().col(3).normalized();
  if (q[0] < 0) q = -q;

  Eigen::Matrix3d r = quaternion_to_rotation(q);
  // Re-project onto SO(3) to strip rounding.
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  r = svd.matrixU() * svd.matrixV().transpose();
  return {r, dst_mean - r * src_mean};
}

/// Sum of squared residuals of `t` over `pairs`.
inline double squared_residual(const CorrespondenceSet& pairs, const RigidTransform& t) {
  double sum = 0;
  for (const auto& c : pairs) sum += (transform_point(c.source, t) - c.target).squaredNorm();
  return sum;
}

}  // namespace surfpos
