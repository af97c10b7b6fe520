#include <gtest/gtest.h>

#include "surfpos/compare.hpp"
#include "test_util.hpp"

using namespace surfpos;

namespace {

HeightMapParams grid() {
  HeightMapParams p;
  p.step = 0.1;
  p.x_min = 0;
  p.x_max = 0.3;
  p.y_min = 0;
  p.y_max = 0.2;
  return p;
}

const Rgb kBlack{0, 0, 0};

}  // namespace

TEST(ErrorMap, IdenticalMapsAreBlue) {
  HeightMap a(grid());
  a.at(0, 0) = 0.2;
  a.at(2, 1) = -0.7;
  const auto img = error_map(a, a);
  EXPECT_EQ(img.width, 3);
  EXPECT_EQ(img.height, 2);
  // Cell row b = 0 is drawn at the bottom.
  EXPECT_EQ(img.at(0, 1), (Rgb{0, 0, 255}));
  EXPECT_EQ(img.at(2, 0), (Rgb{0, 0, 255}));
  EXPECT_EQ(img.at(1, 0), kBlack);
  EXPECT_EQ(img.at(0, 0), kBlack);
}

TEST(ErrorMap, HalfwayAndSaturated) {
  HeightMap a(grid()), b(grid());
  a.at(0, 0) = 0.0;
  b.at(0, 0) = 0.05;
  a.at(1, 0) = 0.3;
  b.at(1, 0) = 0.05;
  a.at(2, 0) = 0.0;
  b.at(2, 0) = 0.10;
  const auto img = error_map(a, b);
  EXPECT_EQ(img.at(0, 1), (Rgb{128, 0, 128}));
  EXPECT_EQ(img.at(1, 1), (Rgb{255, 0, 0}));
  EXPECT_EQ(img.at(2, 1), (Rgb{255, 0, 0}));
}

TEST(ErrorMap, RampOracleAndSymmetry) {
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> h(-0.1, 0.2);
  std::bernoulli_distribution defined(0.7);
  HeightMapParams p = grid();
  p.x_max = 3.0;
  p.y_max = 2.0;
  HeightMap a(p), b(p);
  for (auto& v : a.cells()) v = defined(rng) ? h(rng) : std::nan("");
  for (auto& v : b.cells()) v = defined(rng) ? h(rng) : std::nan("");
  const auto img = error_map(a, b);
  const auto swapped = error_map(b, a);
  EXPECT_EQ(img.pixels, swapped.pixels);
  for (int bb = 0; bb < a.rows(); ++bb) {
    for (int aa = 0; aa < a.cols(); ++aa) {
      const Rgb px = img.at(aa, a.rows() - 1 - bb);
      EXPECT_EQ(px[1], 0);
      if (!a.defined(aa, bb) || !b.defined(aa, bb)) {
        EXPECT_EQ(px, kBlack);
        continue;
      }
      const double c = std::min(std::abs(a.at(aa, bb) - b.at(aa, bb)) / 0.1, 1.0);
      EXPECT_EQ(px[0], static_cast<int>(std::floor(255 * c + 0.5)));
      EXPECT_EQ(px[2], static_cast<int>(std::floor(255 * (1 - c) + 0.5)));
      // Complementary away from exact half-integers.
      if (std::abs(255 * c - std::floor(255 * c) - 0.5) > 1e-9) EXPECT_EQ(px[0] + px[2], 255);
    }
  }
}

TEST(ErrorMap, GridMismatchThrows) {
  auto q = grid();
  q.x_max = 0.4;
  try {
    error_map(HeightMap(grid()), HeightMap(q));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ParamsMismatch);
  }
  EXPECT_THROW(overlay(HeightMap(grid()), HeightMap(q)), Error);
}

TEST(Overlay, Examples) {
  HeightMap ref(grid()), cur(grid());
  ref.at(0, 0) = 0.1;  // reference only
  ref.at(1, 0) = 0.3;
  cur.at(1, 0) = 0.5;  // both at their maxima
  cur.at(2, 0) = 0.2;
  const auto img = overlay(ref, cur);
  const Rgb only_ref = img.at(0, 1);
  EXPECT_EQ(only_ref[0], 0);
  EXPECT_EQ(only_ref[1], 0);
  EXPECT_GE(only_ref[2], 64);
  EXPECT_EQ(only_ref[2], 64);  // reference minimum
  EXPECT_EQ(img.at(1, 1), (Rgb{255, 0, 255}));
  EXPECT_EQ(img.at(2, 1), (Rgb{64, 0, 0}));
  EXPECT_EQ(img.at(0, 0), kBlack);
}

TEST(Overlay, FlatMapIsFullyBright) {
  HeightMap ref(grid()), cur(grid());
  ref.at(0, 0) = 0.4;
  ref.at(1, 1) = 0.4;
  const auto img = overlay(ref, cur);
  EXPECT_EQ(img.at(0, 1), (Rgb{0, 0, 255}));
  EXPECT_EQ(overlay_shade(0.4, 0.4, 0.4), 255);
}

TEST(Overlay, FloorCutHidesLowCells) {
  HeightMap ref(grid()), cur(grid());
  ref.at(0, 0) = 0.001;
  ref.at(1, 0) = 0.2;
  cur.at(0, 0) = 0.001;
  const auto img = overlay(ref, cur, 0.01);
  EXPECT_EQ(img.at(0, 1), kBlack);
  EXPECT_EQ(img.at(1, 1), (Rgb{0, 0, 255}));
}

TEST(HeightmapImage, GrayShades) {
  HeightMap m(grid());
  m.at(0, 0) = 0.0;
  m.at(1, 1) = 1.0;
  const auto img = heightmap_image(m);
  EXPECT_EQ(img.at(0, 1), (Rgb{64, 64, 64}));
  EXPECT_EQ(img.at(1, 0), (Rgb{255, 255, 255}));
  EXPECT_EQ(img.at(2, 0), kBlack);
}

TEST(PoseError, Examples) {
  std::mt19937_64 rng(72);
  const auto t = surfpos::testing::random_transform(rng);
  const auto zero = pose_error(t, t);
  EXPECT_EQ(zero.rotation_deg, 0.0);
  EXPECT_EQ(zero.translation_mm, 0.0);

  const auto est = RigidTransform::rot_z(deg_to_rad(2), {0.010, 0, 0});
  const auto e = pose_error(est, RigidTransform::identity());
  EXPECT_NEAR(e.rotation_deg, 2.0, 1e-9);
  EXPECT_NEAR(e.translation_mm, 10.0, 1e-12);
}

TEST(PoseError, RotationSymmetric) {
  std::mt19937_64 rng(73);
  for (int i = 0; i < 100; ++i) {
    const auto a = surfpos::testing::random_transform(rng), b = surfpos::testing::random_transform(rng);
    const auto ab = pose_error(a, b), ba = pose_error(b, a);
    EXPECT_NEAR(ab.rotation_deg, ba.rotation_deg, 1e-9);
    EXPECT_GE(ab.rotation_deg, 0.0);
    EXPECT_LE(ab.rotation_deg, 180.0);
  }
}

TEST(ErrorStatistics, Examples) {
  auto s = error_statistics({{1, 10}});
  EXPECT_EQ(s.mean.rotation_deg, 1);
  EXPECT_EQ(s.median.translation_mm, 10);
  s = error_statistics({{1, 10}, {3, 20}});
  EXPECT_EQ(s.mean.rotation_deg, 2);
  EXPECT_EQ(s.mean.translation_mm, 15);
  EXPECT_EQ(s.median.rotation_deg, 2);
  EXPECT_EQ(s.median.translation_mm, 15);
  s = error_statistics({{10, 30}, {1, 10}, {2, 20}});
  EXPECT_NEAR(s.mean.rotation_deg, 13.0 / 3, 1e-12);
  EXPECT_EQ(s.mean.translation_mm, 20);
  EXPECT_EQ(s.median.rotation_deg, 2);
  EXPECT_EQ(s.median.translation_mm, 20);
  EXPECT_THROW(error_statistics({}), Error);
}
