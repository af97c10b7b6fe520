#include <gtest/gtest.h>

#include "surfpos/heightmap.hpp"
#include "test_util.hpp"

using namespace surfpos;

namespace {

HeightMapParams small_grid() {
  HeightMapParams p;
  p.step = 0.01;
  p.x_min = 0.0;
  p.x_max = 0.1;
  p.y_min = 0.0;
  p.y_max = 0.05;
  p.thickness = 0.03;
  return p;
}

PointCloud cloud_of(std::initializer_list<Point3> pts) {
  PointCloud c;
  c.points = pts;
  return c;
}

SceneMarkerCorners corners_from(const RigidTransform& marker_to_scene, double side) {
  SceneMarkerCorners out;
  for (int l = 0; l < 4; ++l) out[0].position[l] = transform_point(canonical_marker_corner(l, side), marker_to_scene);
  return out;
}

}  // namespace

TEST(HeightMapParams, GridSizeFromTableDefaults) {
  const HeightMapParams p;
  EXPECT_EQ(p.cols(), 1400);
  EXPECT_EQ(p.rows(), 800);
  EXPECT_EQ(small_grid().cols(), 10);
  EXPECT_EQ(small_grid().rows(), 5);
  HeightMapParams odd = small_grid();
  odd.x_max = 0.105;
  EXPECT_EQ(odd.cols(), 11);
  HeightMapParams bad = small_grid();
  bad.step = 0;
  EXPECT_THROW(bad.validate(), Error);
}

TEST(ReferenceMarker, CanonicalCornerOrder) {
  EXPECT_EQ(canonical_marker_corner(0, 0.1), Point3(-0.05, -0.05, 0));
  EXPECT_EQ(canonical_marker_corner(1, 0.1), Point3(0.05, -0.05, 0));
  EXPECT_EQ(canonical_marker_corner(2, 0.1), Point3(0.05, 0.05, 0));
  EXPECT_EQ(canonical_marker_corner(3, 0.1), Point3(-0.05, 0.05, 0));
}

TEST(ReferenceMarker, Examples) {
  const double l = 0.104;
  const auto id = reference_marker_transform(corners_from(RigidTransform::identity(), l), 0, l);
  EXPECT_LT((id.matrix() - Eigen::Matrix4d::Identity()).norm(), 1e-12);

  const auto shifted = reference_marker_transform(corners_from(RigidTransform::from_translation({0.3, 0.1, 0.05}), l), 0, l);
  EXPECT_LT((shifted.translation() - Eigen::Vector3d(-0.3, -0.1, -0.05)).norm(), 1e-9);
  EXPECT_LT((shifted.rotation() - Eigen::Matrix3d::Identity()).norm(), 1e-9);

  const auto turned = reference_marker_transform(corners_from(RigidTransform::rot_z(deg_to_rad(90)), l), 0, l);
  const Eigen::Matrix4d oracle = RigidTransform::rot_z(deg_to_rad(-90)).matrix();
  EXPECT_LT((turned.matrix() - oracle).norm(), 1e-9);

  try {
    reference_marker_transform(corners_from(RigidTransform::identity(), l), 3, l);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MissingMarker);
  }
}

TEST(KeyframeHeightmap, SinglePoint) {
  const auto m = build_keyframe_heightmap(cloud_of({{0.034, 0.021, 0.7}}), small_grid());
  EXPECT_EQ(m.defined_count(), 1u);
  EXPECT_EQ(m.at(3, 2), 0.7);
}

TEST(KeyframeHeightmap, MeanWithinThickness) {
  const auto m = build_keyframe_heightmap(cloud_of({{0.011, 0.011, 0.50}, {0.019, 0.019, 0.49}}), small_grid());
  EXPECT_EQ(m.defined_count(), 1u);
  EXPECT_EQ(m.at(1, 1), (0.50 + 0.49) / 2);
  EXPECT_NEAR(m.at(1, 1), 0.495, 1e-15);
}

TEST(KeyframeHeightmap, ExclusionBeyondThickness) {
  const auto m = build_keyframe_heightmap(cloud_of({{0.011, 0.011, 0.50}, {0.019, 0.019, 0.40}}), small_grid());
  EXPECT_EQ(m.at(1, 1), 0.50);
}

TEST(KeyframeHeightmap, ThicknessBoundIsStrict) {
  auto p = small_grid();
  p.thickness = 0.25;  // exactly representable gaps below
  const auto m = build_keyframe_heightmap(cloud_of({{0.011, 0.011, 0.5}, {0.012, 0.012, 0.25}}), p);
  EXPECT_EQ(m.at(1, 1), 0.5);
}

TEST(KeyframeHeightmap, BoundsAndClosedUpperEdge) {
  const auto p = small_grid();
  const auto m = build_keyframe_heightmap(
      cloud_of({{0.1, 0.05, 1.0}, {0.0, 0.0, 2.0}, {-0.001, 0.01, 3.0}, {0.05, 0.0501, 4.0}}), p);
  EXPECT_EQ(m.defined_count(), 2u);
  EXPECT_EQ(m.at(9, 4), 1.0);
  EXPECT_EQ(m.at(0, 0), 2.0);
}

TEST(KeyframeHeightmap, Properties) {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> ux(-0.01, 0.11), uy(-0.01, 0.06), uz(0, 0.1);
  PointCloud c;
  for (int i = 0; i < 400; ++i) c.points.emplace_back(ux(rng), uy(rng), uz(rng));
  const auto p = small_grid();
  const auto m = build_keyframe_heightmap(c, p);

  std::size_t in_bounds = 0;
  std::vector<double> zmax(m.cells().size(), -1e9);
  for (const auto& q : c.points) {
    if (q.x() < p.x_min || q.x() > p.x_max || q.y() < p.y_min || q.y() > p.y_max) continue;
    ++in_bounds;
    const int a = std::min(static_cast<int>(std::floor((q.x() - p.x_min) / p.step)), m.cols() - 1);
    const int b = std::min(static_cast<int>(std::floor((q.y() - p.y_min) / p.step)), m.rows() - 1);
    auto& z = zmax[static_cast<std::size_t>(b) * m.cols() + a];
    z = std::max(z, q.z());
  }
  EXPECT_LE(m.defined_count(), in_bounds);
  for (std::size_t i = 0; i < zmax.size(); ++i) {
    if (std::isnan(m.cells()[i])) {
      EXPECT_EQ(zmax[i], -1e9);
      continue;
    }
    EXPECT_LE(m.cells()[i], zmax[i]);
    EXPECT_GT(m.cells()[i], zmax[i] - p.thickness);
  }

  auto shuffled = c;
  std::shuffle(shuffled.points.begin(), shuffled.points.end(), rng);
  const auto m2 = build_keyframe_heightmap(shuffled, p);
  for (std::size_t i = 0; i < zmax.size(); ++i) {
    if (std::isnan(m.cells()[i])) {
      EXPECT_TRUE(std::isnan(m2.cells()[i]));
    } else {
      EXPECT_NEAR(m.cells()[i], m2.cells()[i], 1e-12);
    }
  }
}

TEST(MergeHeightmaps, Examples) {
  const auto p = small_grid();
  HeightMap a(p), b(p);
  a.at(0, 0) = 0.3;
  a.at(2, 1) = 0.50;
  b.at(4, 4) = 0.7;
  b.at(2, 1) = 0.52;

  const auto single = merge_heightmaps({a});
  EXPECT_EQ(single.defined_count(), 2u);
  EXPECT_EQ(single.at(0, 0), 0.3);
  EXPECT_EQ(single.at(2, 1), 0.50);

  const auto both = merge_heightmaps({a, b});
  EXPECT_EQ(both.defined_count(), 3u);
  EXPECT_EQ(both.at(0, 0), 0.3);
  EXPECT_EQ(both.at(4, 4), 0.7);
  EXPECT_EQ(both.at(2, 1), (0.50 + 0.52) / 2);
  EXPECT_NEAR(both.at(2, 1), 0.51, 1e-15);
}

TEST(MergeHeightmaps, Errors) {
  auto q = small_grid();
  q.step = 0.02;
  try {
    merge_heightmaps({HeightMap(small_grid()), HeightMap(q)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ParamsMismatch);
  }
  EXPECT_THROW(merge_heightmaps({}), Error);
}
