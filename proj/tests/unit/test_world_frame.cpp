#include <omp.h>

#include <random>

#include <gtest/gtest.h>

#include "truckloc/error.hpp"
#include "truckloc/synthetic_scenes.hpp"
#include "truckloc/world_frame.hpp"

namespace truckloc {
namespace {

struct DiscScan {
  PointCloud cloud;  // platform frame
  Vec3 center;       // platform frame
  ReflectorSpec spec;
};

// Sensor 3.3 m above a grey floor, one bright disc near the nadir.
DiscScan scan_disc(double radius, double sigma, std::uint64_t seed, bool distractor = false) {
  const SensorPlacement sensor{{0.0, 0.0, 3.3}, 0.0};
  const Vec3 center_w(2.5, 0.0, 0.0);
  SceneModel world;
  Primitive floor = Primitive::rectangle(1, RigidTransform(Mat3::Identity(), {0, 0, -0.001}), 12.0, 12.0, 0.2f);
  world.primitives.push_back(floor);
  world.primitives.push_back(Primitive::disc(2, center_w, Vec3::UnitZ(), radius, 0.95f));
  if (distractor) world.primitives.push_back(Primitive::box(3, {3.5, 0.7, 0.3}, {0.4, 0.4, 0.6}, 0.0, 0.95f));
  SensorConfig cfg;
  cfg.platform_resolution = deg2rad(0.1);
  cfg.platform_min = deg2rad(-15.0);
  cfg.platform_max = deg2rad(15.0);
  cfg.range_noise_sigma = sigma;
  const SceneModel scene = world.transformed(sensor.world_to_platform());
  const SimulatedScan scan = simulate_scan(scene, cfg, Extrinsics{}, seed);
  DiscScan out;
  out.cloud = samples_to_cloud(scan.samples, scan.intensity, Extrinsics{});
  out.center = sensor.world_to_platform() * center_w;
  out.spec.name = "P1";
  const Vec3 half(0.6, 0.3, 0.6);
  out.spec.seed_region = {out.center - half, out.center + half};
  out.spec.expected_radius = radius;
  return out;
}

std::array<Vec3, 4> square(double x, double y, double z) {
  return {Vec3(0, 0, z), Vec3(x, 0, z), Vec3(x, y, z), Vec3(0, y, z)};
}

TEST(Reflector, NoiseFreeCenterWithinOneMillimetre) {
  const DiscScan s = scan_disc(0.1, 0.0, 1);
  const ReflectorFit fit = locate_reflector(s.cloud, s.spec);
  EXPECT_LT((fit.center - s.center).norm(), 0.001);
  EXPECT_FALSE(fit.radius_warning);
}

TEST(Reflector, DistractorOutsideSeedRegionChangesNothing) {
  const DiscScan plain = scan_disc(0.25, 0.002, 3);
  const DiscScan cluttered = scan_disc(0.25, 0.002, 3, true);
  ASSERT_GT(cluttered.cloud.size(), 0u);
  const ReflectorFit a = locate_reflector(plain.cloud, plain.spec);
  const ReflectorFit b = locate_reflector(cluttered.cloud, cluttered.spec);
  EXPECT_EQ(a.center, b.center);
  EXPECT_LT((a.center - plain.center).norm(), 0.005);
}

TEST(Reflector, ErrorShrinksWithNoise) {
  std::vector<double> mean_err;
  for (double sigma : {0.008, 0.004, 0.0}) {
    double sum = 0.0;
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      const DiscScan s = scan_disc(0.25, sigma, seed);
      sum += (locate_reflector(s.cloud, s.spec).center - s.center).norm();
    }
    mean_err.push_back(sum / 4.0);
  }
  EXPECT_LT(mean_err[1], mean_err[0]);
  EXPECT_LT(mean_err[2], mean_err[1]);
}

TEST(Reflector, EmptySeedRegionNamesReflector) {
  DiscScan s = scan_disc(0.25, 0.0, 1);
  s.spec.name = "P3";
  s.spec.seed_region.min.x() += 20.0;
  s.spec.seed_region.max.x() += 20.0;
  try {
    locate_reflector(s.cloud, s.spec);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kReflectorNotFound);
    EXPECT_NE(std::string(e.what()).find("P3"), std::string::npos);
  }
}

TEST(Reflector, RadiusWarning) {
  DiscScan s = scan_disc(0.25, 0.0, 1);
  s.spec.expected_radius = 0.1;
  EXPECT_TRUE(locate_reflector(s.cloud, s.spec).radius_warning);
}

TEST(WorldFrame, AxisAlignedSquare) {
  const RigidTransform a_from_o = build_world_frame(square(1.0, 1.0, -1.0));
  const Mat3 o_r_a = a_from_o.inverse().rotation();
  EXPECT_LT((o_r_a - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((a_from_o * Vec3(0, 0, -1)).norm(), 1e-12);
}

TEST(WorldFrame, RotatedCornersLandOnAxes) {
  const RigidTransform o_from_w(rotation_z(deg2rad(30.0)), Vec3(-7.0, 2.0, -3.3));
  auto corners = square(15.0, 5.0, 0.0);
  for (auto& c : corners) c = o_from_w * c;
  const RigidTransform a_from_o = build_world_frame(corners);
  const auto expected = square(15.0, 5.0, 0.0);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_LT((a_from_o * corners[i] - expected[i]).norm(), 1e-9);
  const ParkingArea area = ParkingArea::from_corners(corners);
  EXPECT_NEAR(area.x_max, 15.0, 1e-9);
  EXPECT_NEAR(area.y_max, 5.0, 1e-9);
  const Vec3 p(0.3, -0.2, 1.7);
  EXPECT_LT((a_from_o.inverse() * (a_from_o * p) - p).norm(), 1e-9);
  EXPECT_TRUE(is_rotation(a_from_o.rotation()));
}

TEST(WorldFrame, InvariantToRigidMotionOfEverything) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> a(-0.3, 0.3), t(-2.0, 2.0);
  auto corners = square(15.0, 5.0, -3.3);
  const RigidTransform a_from_o = build_world_frame(corners);
  const Vec3 p(4.0, 1.0, -2.0);
  for (int i = 0; i < 50; ++i) {
    const RigidTransform m(euler_to_rotation({a(rng), a(rng), a(rng)}), {t(rng), t(rng), t(rng) * 0.2});
    auto moved = corners;
    for (auto& c : moved) c = m * c;
    EXPECT_LT((build_world_frame(moved) * (m * p) - a_from_o * p).norm(), 1e-8);
  }
}

TEST(WorldFrame, RejectsBadCorners) {
  auto cw = square(15.0, 5.0, -3.3);
  std::swap(cw[1], cw[3]);
  try {
    build_world_frame(cw);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kWorldFrameInvalid);
  }
  auto bent = square(15.0, 5.0, -3.3);
  bent[2].z() += 0.2;
  EXPECT_THROW(build_world_frame(bent), Error);
  auto skew = square(15.0, 5.0, -3.3);
  skew[2].x() += 0.5;
  EXPECT_THROW(build_world_frame(skew), Error);
}

TEST(Crop, BoundaryPoints) {
  const auto corners = square(15.0, 5.0, -3.3);
  const ParkingArea area = ParkingArea::from_corners(corners);
  const RigidTransform a_from_o = build_world_frame(corners);
  const CropBounds b;
  const RigidTransform o_from_a = a_from_o.inverse();
  PointCloud c;
  c.push_back(o_from_a * Vec3(7.5, 2.5, 0.5 * (b.z_min + b.z_max)));
  c.push_back(o_from_a * Vec3(7.5, 2.5, b.z_min - 0.001));
  c.push_back(o_from_a * Vec3(15.01, 2.5, 1.0));
  const PointCloud out = crop_to_parking(c, a_from_o, area, b);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_LT((out.points[0] - Vec3(7.5, 2.5, 0.5 * (b.z_min + b.z_max))).norm(), 1e-9);
}

TEST(Crop, EqualsBruteForceOnSceneWithSurroundings) {
  ParkingLayout layout;
  layout.surroundings = true;
  const RigidTransform to_o = layout.sensor().world_to_platform();
  std::array<Vec3, 4> corners;
  for (std::size_t i = 0; i < 4; ++i) corners[i] = to_o * layout.corners()[i];
  const ParkingArea area = ParkingArea::from_corners(corners);
  const RigidTransform a_from_o = build_world_frame(corners);
  const CropBounds b = CropBounds::for_mount_height(layout.mount_height);
  for (std::uint64_t seed : {1, 2, 3}) {
    SensorConfig cfg;
    cfg.platform_resolution = deg2rad(0.5);
    const SimulatedScan scan =
        simulate_scan(make_truck_scene(random_truck(seed), layout).transformed(to_o), cfg, Extrinsics{}, seed);
    const PointCloud cloud = samples_to_cloud(scan.samples, scan.intensity, Extrinsics{});
    const PointCloud out = crop_to_parking(cloud, a_from_o, area, b);
    PointCloud brute;
    std::size_t outside_hits = 0;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      const Vec3 p = a_from_o * cloud.points[i];
      const bool in = p.x() >= 0 && p.x() <= area.x_max && p.y() >= 0 && p.y() <= area.y_max && p.z() >= b.z_min &&
                      p.z() <= b.z_max;
      if (in) brute.push_back(p, cloud.intensity[i]);
      if (scan.primitive_id[i] >= 20 && scan.primitive_id[i] < 30) outside_hits += in;
    }
    EXPECT_EQ(outside_hits, 0u);
    ASSERT_EQ(out.size(), brute.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      EXPECT_EQ(out.points[i], brute.points[i]);
      EXPECT_EQ(out.intensity[i], brute.intensity[i]);
    }
    const PointCloud serial = reference::crop_to_parking_serial(cloud, a_from_o, area, b);
    ASSERT_EQ(serial.size(), out.size());
    for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(serial.points[i], out.points[i]);
  }
}

TEST(SetupParking, SyntheticCornersWithinFiveMillimetres) {
  const ParkingLayout layout;
  const RigidTransform to_o = layout.sensor().world_to_platform();
  SensorConfig cfg;
  cfg.platform_resolution = deg2rad(0.1);
  const SimulatedScan scan = simulate_scan(make_parking_scene(layout).transformed(to_o), cfg, Extrinsics{}, 7);
  const PointCloud cloud = samples_to_cloud(scan.samples, scan.intensity, Extrinsics{});
  std::array<ReflectorFit, 4> fits;
  const WorldFrame wf = setup_parking(cloud, parking_setup_for(layout), &fits);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_LT((fits[i].center - to_o * layout.corners()[i]).norm(), 0.005) << "P" << i + 1;
    EXPECT_LT((wf.a_from_o * fits[i].center - layout.corners()[i]).norm(), 0.01);
  }
  EXPECT_NEAR(wf.area.x_max, layout.length, 0.01);
  EXPECT_NEAR(wf.area.y_max, layout.width, 0.01);
  const WorldFrame again = setup_parking(cloud, parking_setup_for(layout));
  EXPECT_EQ(again.a_from_o.matrix(), wf.a_from_o.matrix());
}

}  // namespace
}  // namespace truckloc
