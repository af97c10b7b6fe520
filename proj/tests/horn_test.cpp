#include <gtest/gtest.h>

#include "surfpos/horn.hpp"
#include "test_util.hpp"

using namespace surfpos;
using surfpos::testing::random_point;
using surfpos::testing::random_transform;

namespace {

CorrespondenceSet mapped(const std::vector<Point3>& src, const RigidTransform& t) {
  CorrespondenceSet out;
  for (const auto& p : src) out.push_back({p, transform_point(p, t)});
  return out;
}

ErrorKind kind_of(const CorrespondenceSet& pairs) {
  try {
    find_transform(pairs);
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorKind::Io;
}

}  // namespace

TEST(FindTransform, SelfPairsGiveIdentity) {
  const std::vector<Point3> src{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  const auto t = find_transform(mapped(src, RigidTransform::identity()));
  EXPECT_LT((t.rotation() - Eigen::Matrix3d::Identity()).norm(), 1e-12);
  EXPECT_LT(t.translation().norm(), 1e-12);
}

TEST(FindTransform, RecoversKnownTransform) {
  const std::vector<Point3> src{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  const auto truth = RigidTransform::rot_z(deg_to_rad(30), {0.1, -0.2, 0.3});
  const auto t = find_transform(mapped(src, truth));
  EXPECT_LT((t.rotation() - truth.rotation()).norm(), 1e-9);
  EXPECT_LT((t.translation() - truth.translation()).norm(), 1e-9);
}

TEST(FindTransform, CoplanarNonCollinearIsFine) {
  const std::vector<Point3> src{{-1, -1, 0}, {1, -1, 0}, {1, 1, 0}, {-1, 1, 0}};
  std::mt19937_64 rng(3);
  const auto truth = random_transform(rng);
  const auto t = find_transform(mapped(src, truth));
  EXPECT_LT((t.matrix() - truth.matrix()).norm(), 1e-9);
}

TEST(FindTransform, Errors) {
  EXPECT_EQ(kind_of({}), ErrorKind::InsufficientCorrespondences);
  EXPECT_EQ(kind_of(mapped({{0, 0, 0}, {1, 0, 0}}, RigidTransform::identity())),
            ErrorKind::InsufficientCorrespondences);
  EXPECT_EQ(kind_of(mapped({{1, 2, 3}, {1, 2, 3}, {1, 2, 3}}, RigidTransform::identity())),
            ErrorKind::DegenerateGeometry);
  EXPECT_EQ(kind_of(mapped({{0, 0, 0}, {1, 1, 1}, {2, 2, 2}, {3, 3, 3}}, RigidTransform::identity())),
            ErrorKind::DegenerateGeometry);
}

TEST(FindTransform, RandomExactSetsRecovered) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> count(4, 100);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Point3> src(count(rng));
    for (auto& p : src) p = random_point(rng);
    const auto truth = random_transform(rng, kPi, 2.0);
    const auto t = find_transform(mapped(src, truth));
    EXPECT_LT((t.rotation() - truth.rotation()).norm(), 1e-9);
    EXPECT_LT((t.translation() - truth.translation()).norm(), 1e-9);
    EXPECT_TRUE(RigidTransform::is_rotation(t.rotation()));
  }
}

TEST(FindTransform, NoisyTargetsBeatGenerator) {
  std::mt19937_64 rng(22);
  std::normal_distribution<double> noise(0.0, 0.05);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Point3> src(20);
    for (auto& p : src) p = random_point(rng);
    const auto truth = random_transform(rng);
    auto pairs = mapped(src, truth);
    for (auto& c : pairs) c.target += Point3(noise(rng), noise(rng), noise(rng));
    const auto t = find_transform(pairs);
    EXPECT_LE(squared_residual(pairs, t), squared_residual(pairs, truth) * (1 + 1e-12));
  }
}

TEST(FindTransform, PermutationInvariant) {
  std::mt19937_64 rng(23);
  std::vector<Point3> src(30);
  for (auto& p : src) p = random_point(rng);
  auto pairs = mapped(src, random_transform(rng));
  for (auto& c : pairs) c.target += random_point(rng, 0.01);
  const auto a = find_transform(pairs);
  std::shuffle(pairs.begin(), pairs.end(), rng);
  const auto b = find_transform(pairs);
  EXPECT_LT((a.matrix() - b.matrix()).norm(), 1e-12);
}

TEST(QuaternionToRotation, MatchesAxisAngle) {
  const double half = deg_to_rad(40) / 2;
  const Eigen::Vector3d axis = Eigen::Vector3d(1, 2, 3).normalized();
  const Eigen::Vector4d q(std::cos(half), std::sin(half) * axis.x(), std::sin(half) * axis.y(), std::sin(half) * axis.z());
  const auto r = quaternion_to_rotation(q);
  EXPECT_LT((r - RigidTransform::from_axis_angle(axis, deg_to_rad(40)).rotation()).norm(), 1e-14);
}
