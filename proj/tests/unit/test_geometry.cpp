#include <random>

#include <gtest/gtest.h>

#include "truckloc/geometry.hpp"
#include "truckloc/kdtree.hpp"
#include "truckloc/point_cloud.hpp"

namespace truckloc {
namespace {

Mat3 random_rotation(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> a(-kPi, kPi);
  return euler_to_rotation({a(rng), a(rng) / 2.0, a(rng)});
}

Vec3 random_vec(std::mt19937_64& rng, double scale = 10.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return {u(rng), u(rng), u(rng)};
}

TEST(Euler, ZeroIsIdentity) { EXPECT_TRUE(euler_to_rotation({}).isApprox(Mat3::Identity(), 1e-15)); }

TEST(Euler, YawQuarterTurn) {
  const Vec3 p = euler_to_rotation({0.0, 0.0, kPi / 2}) * Vec3::UnitX();
  EXPECT_NEAR((p - Vec3::UnitY()).norm(), 0.0, 1e-15);
}

TEST(Euler, DeploymentMagnitudesGiveProperRotation) {
  const Mat3 r = euler_to_rotation({deg2rad(-1.46), deg2rad(5.36), deg2rad(-0.45)});
  EXPECT_TRUE(is_rotation(r));
  EXPECT_NEAR(r.determinant(), 1.0, 1e-12);
}

TEST(Euler, RandomAnglesAlwaysOrthonormal) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 1000; ++i) {
    const Mat3 r = random_rotation(rng);
    EXPECT_LE(((r.transpose() * r) - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_GT(r.determinant(), 0.0);
  }
}

TEST(Platform, Examples) {
  EXPECT_TRUE(platform_rotation(0.0).isApprox(Mat3::Identity(), 1e-15));
  EXPECT_NEAR((platform_rotation(kPi / 2) * Vec3::UnitX() - Vec3(0, 0, -1)).norm(), 0.0, 1e-15);
  const Vec3 p(1.5, -2.0, 0.25);
  EXPECT_NEAR((platform_rotation(kPi) * p - Vec3(-1.5, -2.0, -0.25)).norm(), 0.0, 1e-15);
}

TEST(Platform, AnglesAdd) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> a(-10.0, 10.0);
  for (int i = 0; i < 200; ++i) {
    const double p1 = a(rng), p2 = a(rng);
    EXPECT_LE((platform_rotation(p1) * platform_rotation(p2) - platform_rotation(p1 + p2)).cwiseAbs().maxCoeff(),
              1e-9);
  }
}

TEST(RigidTransform, IdentityAndTranslation) {
  std::mt19937_64 rng(5);
  const Vec3 p = random_vec(rng);
  EXPECT_EQ(RigidTransform::identity() * p, p);
  EXPECT_EQ(RigidTransform::from_translation({1, 0, 0}) * Vec3(1, 2, 3), Vec3(2, 2, 3));
}

TEST(RigidTransform, GroupProperties) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 500; ++i) {
    const RigidTransform t1(random_rotation(rng), random_vec(rng));
    const RigidTransform t2(random_rotation(rng), random_vec(rng));
    const Vec3 p = random_vec(rng);
    EXPECT_LT((invert(t1) * (t1 * p) - p).norm(), 1e-9);
    const Mat4 lhs = invert(compose(t1, t2)).matrix();
    const Mat4 rhs = compose(invert(t2), invert(t1)).matrix();
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((compose(t1, t2) * p - t1 * (t2 * p)).norm(), 1e-9);
  }
}

TEST(RigidTransform, RejectsNonRotation) {
  Mat3 m = Mat3::Identity();
  m(0, 0) = 1.01;
  EXPECT_ANY_THROW(RigidTransform(m, Vec3::Zero()));
  EXPECT_ANY_THROW(RigidTransform(-Mat3::Identity(), Vec3::Zero()));
}

TEST(RigidTransform, MatrixRoundTrip) {
  std::mt19937_64 rng(9);
  const RigidTransform t(random_rotation(rng), random_vec(rng));
  const RigidTransform back = RigidTransform::from_matrix(t.matrix());
  EXPECT_EQ(back.matrix(), t.matrix());
}

TEST(ProjectOntoLine, Examples) {
  const auto on = project_point_onto_line({0.5, 0, 0}, {0, 0, 0}, {1, 0, 0});
  EXPECT_NEAR((on.foot - Vec3(0.5, 0, 0)).norm(), 0.0, 1e-15);
  const auto mid = project_point_onto_line({0, 1, 0}, {-1, 0, 0}, {1, 0, 0});
  EXPECT_NEAR(mid.foot.norm(), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(mid.param, 0.5);
  const auto out = project_point_onto_line({3, 4, 0}, {0, 0, 0}, {1, 0, 0});
  EXPECT_NEAR((out.foot - Vec3(3, 0, 0)).norm(), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(out.param, 3.0);
}

TEST(ProjectOntoLine, FootMinimizesDistance) {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 100; ++i) {
    const Vec3 a = random_vec(rng), b = random_vec(rng), p = random_vec(rng);
    const auto proj = project_point_onto_line(p, a, b);
    const double best = (p - proj.foot).norm();
    for (int s = -2000; s <= 2000; ++s) {
      const double u = proj.param + s * 1e-3;
      EXPECT_GE((p - (a + u * (b - a))).norm(), best - 1e-12);
    }
  }
}

TEST(Segments, Distances) {
  const LineSegment3D a({0, 0, 0}, {1, 0, 0});
  EXPECT_DOUBLE_EQ(distance_to_line({5, 2, 0}, a), 2.0);
  EXPECT_NEAR(segment_distance(a, LineSegment3D({2, 1, 0}, {3, 1, 0})), std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(segment_distance(a, LineSegment3D({0.5, -1, 1}, {0.5, 1, 1})), 1.0, 1e-12);
}

TEST(KdTree, MatchesBruteForce) {
  std::mt19937_64 rng(17);
  std::vector<Vec3> pts(3000);
  for (auto& p : pts) p = random_vec(rng, 2.0);
  const KdTree tree(pts);
  std::vector<KdTree::Neighbor> found;
  for (int q = 0; q < 50; ++q) {
    const Vec3 query = random_vec(rng, 2.5);
    tree.knn(query, 12, found);
    std::vector<std::pair<double, std::uint32_t>> brute;
    for (std::uint32_t i = 0; i < pts.size(); ++i) brute.emplace_back((pts[i] - query).squaredNorm(), i);
    std::sort(brute.begin(), brute.end());
    ASSERT_EQ(found.size(), 12u);
    for (int j = 0; j < 12; ++j) EXPECT_EQ(found[j].index, brute[j].second);
  }
}

TEST(KdTree, TableRowsStartWithSelf) {
  std::mt19937_64 rng(19);
  std::vector<Vec3> pts(500);
  for (auto& p : pts) p = random_vec(rng);
  const NeighborTable t = knn_table(pts, 6);
  ASSERT_EQ(t.size(), pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_EQ(t.row(i)[0], i);
    EXPECT_EQ(t.dist_row(i)[0], 0.0f);
  }
}

TEST(VoxelDownsample, OnePointPerOccupiedVoxel) {
  PointCloud c;
  for (int i = 0; i < 10; ++i) c.push_back({0.001 * i, 0.0, 0.0}, 0.5f);
  c.push_back({1.0, 1.0, 1.0}, 0.9f);
  const PointCloud d = voxel_downsample(c, 0.1);
  EXPECT_EQ(d.size(), 2u);
  EXPECT_EQ(voxel_downsample(PointCloud{}, 0.1).size(), 0u);
}

}  // namespace
}  // namespace truckloc
