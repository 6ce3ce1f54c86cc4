#include <random>

#include <gtest/gtest.h>

#include "truckloc/calibration.hpp"
#include "truckloc/error.hpp"
#include "truckloc/plane_fit.hpp"
#include "truckloc/synthetic_scenes.hpp"

namespace truckloc {
namespace {

Extrinsics reference_extrinsics() {
  Extrinsics e;
  e.rotation = {deg2rad(-1.5), 0.0, deg2rad(-0.5)};
  e.translation = {0.015, 0.0, 0.120};
  return e;
}

std::vector<PlaneDataset> scan_planes(std::uint64_t seed, int planes, double sigma, const Extrinsics& truth,
                                      const RigidTransform& scene_motion = {}) {
  const SceneModel scene = make_calibration_scene(seed, {.planes = planes}).transformed(scene_motion);
  SensorConfig cfg = calibration_sensor_config();
  cfg.range_noise_sigma = sigma;
  return plane_datasets_from_scan(simulate_scan(scene, cfg, truth, seed));
}

double rotation_error_deg(const Extrinsics& a, const Extrinsics& b) {
  return rad2deg(std::max(std::abs(a.rotation.roll - b.rotation.roll), std::abs(a.rotation.yaw - b.rotation.yaw)));
}

double translation_error_mm(const Extrinsics& a, const Extrinsics& b) {
  return 1000.0 * std::max(std::abs(a.translation.x() - b.translation.x()),
                           std::abs(a.translation.z() - b.translation.z()));
}

TEST(Ransac, ExactPlanarPoints) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const Plane truth = Plane::from_point_normal({0.3, -1.0, 2.0}, Vec3(1, 2, 3).normalized());
  const auto [e1, e2] = orthonormal_basis(truth.normal);
  std::vector<Vec3> pts;
  for (int i = 0; i < 300; ++i) pts.push_back(truth.project(Vec3::Zero()) + u(rng) * e1 + u(rng) * e2);
  const PlaneFit fit = fit_plane_ransac(pts, 0.01, 100, 3);
  EXPECT_EQ(fit.inlier_count, pts.size());
  EXPECT_LT(fit.max_inlier_residual, 1e-9);
}

TEST(Ransac, ToleratesThirtyPercentOutliers) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::normal_distribution<double> noise(0.0, 0.002);
  const Vec3 n = Vec3(0.2, -0.3, 1.0).normalized();
  const auto [e1, e2] = orthonormal_basis(n);
  std::vector<Vec3> pts;
  for (int i = 0; i < 700; ++i) pts.push_back(u(rng) * e1 + u(rng) * e2 + noise(rng) * n);
  for (int i = 0; i < 300; ++i) pts.push_back({u(rng), u(rng), u(rng)});
  const PlaneFit fit = fit_plane_ransac(pts, 0.01, 200, 5);
  EXPECT_LT(rad2deg(std::acos(std::min(1.0, std::abs(fit.plane.normal.dot(n))))), 0.5);
}

TEST(Ransac, ThreePointsAndCollinear) {
  const std::vector<Vec3> three{{0, 0, 1}, {1, 0, 1}, {0, 1, 1}};
  const PlaneFit fit = fit_plane_ransac(three, 1e-6, 10);
  EXPECT_NEAR(std::abs(fit.plane.normal.z()), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(fit.plane.offset), 1.0, 1e-12);
  const std::vector<Vec3> line{{0, 0, 0}, {1, 1, 1}, {2, 2, 2}, {3, 3, 3}};
  EXPECT_ANY_THROW(fit_plane_ransac(line, 0.01, 10));
  EXPECT_ANY_THROW(fit_plane_least_squares(line));
}

TEST(LevenbergMarquardt, SolvesRosenbrock) {
  const LeastSquaresProblem p{
      [](const Eigen::VectorXd& x) {
        Eigen::VectorXd r(2);
        r << 10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0];
        return r;
      },
      [](const Eigen::VectorXd& x) {
        Eigen::MatrixXd j(2, 2);
        j << -20.0 * x[0], 10.0, -1.0, 0.0;
        return j;
      }};
  const auto s = levenberg_marquardt(p, Eigen::Vector2d(-1.2, 1.0), {0, 1});
  EXPECT_TRUE(s.converged);
  EXPECT_NEAR(s.x[0], 1.0, 1e-8);
  EXPECT_NEAR(s.x[1], 1.0, 1e-8);
}

TEST(LevenbergMarquardt, InactiveParametersStayFixed) {
  const LeastSquaresProblem p{[](const Eigen::VectorXd& x) { return Eigen::VectorXd(x - Eigen::Vector2d(3, 4)); },
                              [](const Eigen::VectorXd&) { return Eigen::MatrixXd(Eigen::Matrix2d::Identity()); }};
  const auto s = levenberg_marquardt(p, Eigen::Vector2d(0, 0), {1});
  EXPECT_EQ(s.x[0], 0.0);
  EXPECT_NEAR(s.x[1], 4.0, 1e-9);
}

TEST(RotationalCost, ZeroAtTruthAndGrowsWithRoll) {
  const Extrinsics truth = reference_extrinsics();
  const auto ds = with_fitted_planes(scan_planes(1, 10, 0.0, truth), truth);
  EXPECT_LT(rotational_cost(truth.rotation, ds).norm(), 1e-9);
  EulerAngles off = truth.rotation;
  off.roll += deg2rad(1.0);
  EXPECT_GT(rotational_cost(off, ds).norm(), rotational_cost(truth.rotation, ds).norm());
}

TEST(RotationalCost, MissingPlaneIsAnError) {
  auto ds = scan_planes(1, 3, 0.0, Extrinsics{});
  EXPECT_ANY_THROW(rotational_cost({}, ds));
}

TEST(RotationalCost, SinglePlatformAngleIsDegenerate) {
  PlaneDataset d;
  d.id = 1;
  for (int i = 0; i < 50; ++i) d.samples.push_back({2.0 + 0.01 * i, deg2rad(60.0 + i), 0.3});
  EXPECT_THROW(d.validate(), DegeneracyError);
  EXPECT_THROW(calibrate(std::vector<PlaneDataset>{d}, Extrinsics{}), DegeneracyError);
}

TEST(TranslationalCost, ZeroAtTruthSumsToZeroGrowsWithOffset) {
  const Extrinsics truth = reference_extrinsics();
  const auto ds = with_fitted_planes(scan_planes(2, 10, 0.0, truth), truth);
  EXPECT_LT(translational_cost(truth.translation, ds, truth.rotation).norm(), 1e-9);
  const Vec3 off = truth.translation + Vec3(0.0, 0.0, 0.010);
  const Eigen::VectorXd r = translational_cost(off, ds, truth.rotation);
  EXPECT_GT(r.norm(), 1e-4);
  EXPECT_NEAR(r.sum(), 0.0, 1e-9);
}

TEST(CostGradients, AnalyticMatchesCentralDifferences) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> ang(-deg2rad(5.0), deg2rad(5.0)), nrm(-0.05, 0.05), tr(-0.2, 0.2);
  const auto ds = with_fitted_planes(scan_planes(3, 6, 0.002, reference_extrinsics()), reference_extrinsics());
  const RotationalCostFunction rot(ds);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd x = rot.initial_parameters({ang(rng), ang(rng), ang(rng)});
    for (Eigen::Index j = 3; j < x.size(); ++j) x[j] = nrm(rng);
    const Eigen::MatrixXd analytic = rot.jacobian(x);
    const Eigen::MatrixXd numeric = numeric_jacobian([&](const Eigen::VectorXd& v) { return rot.residuals(v); }, x);
    EXPECT_LE((analytic - numeric).norm() / analytic.norm(), 1e-5);
  }
  const TranslationalCostFunction trans(ds, reference_extrinsics().rotation);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Vector3d t(tr(rng), tr(rng), tr(rng));
    const Eigen::MatrixXd analytic = trans.jacobian(t);
    const Eigen::MatrixXd numeric = numeric_jacobian([&](const Eigen::VectorXd& v) { return trans.residuals(v); }, t);
    EXPECT_LE((analytic - numeric).norm() / analytic.norm(), 1e-5);
  }
}

TEST(Calibrate, NoiseFreeTenPlaneRecovery) {
  const Extrinsics truth = reference_extrinsics();
  const CalibrationResult r = calibrate(scan_planes(4, 10, 0.0, truth), Extrinsics{});
  EXPECT_LT(rotation_error_deg(r.extrinsics, truth), 0.01);
  EXPECT_LT(translation_error_mm(r.extrinsics, truth), 0.1);
  EXPECT_EQ(r.extrinsics.rotation.pitch, 0.0);
  EXPECT_EQ(r.extrinsics.translation.y(), 0.0);
  EXPECT_EQ(r.unidentifiable, (std::vector<std::string>{"pitch", "t_y"}));
  EXPECT_GE(r.rotational_residual_norm, 0.0);
  EXPECT_LT(r.translational_residual_norm, 1e-6);
}

TEST(Calibrate, NoisyTenPlaneRecovery) {
  const Extrinsics truth = reference_extrinsics();
  int ok = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const CalibrationResult r = calibrate(scan_planes(seed, 10, 0.002, truth), Extrinsics{});
    ok += rotation_error_deg(r.extrinsics, truth) < 0.1 && translation_error_mm(r.extrinsics, truth) < 2.0;
    EXPECT_GT(r.rotation_std_error.roll, 0.0);
    EXPECT_GT(r.translation_std_error.z(), 0.0);
  }
  EXPECT_EQ(ok, 5);
}

TEST(Calibrate, ErrorShrinksWithNoise) {
  const Extrinsics truth = reference_extrinsics();
  std::vector<double> mean_err;
  for (double sigma : {0.002, 0.001, 0.0005, 0.0}) {
    double sum = 0.0;
    for (std::uint64_t seed = 11; seed <= 14; ++seed) {
      const CalibrationResult r = calibrate(scan_planes(seed, 10, sigma, truth), Extrinsics{});
      sum += rotation_error_deg(r.extrinsics, truth) + translation_error_mm(r.extrinsics, truth) / 10.0;
    }
    mean_err.push_back(sum / 4.0);
  }
  for (std::size_t i = 1; i < mean_err.size(); ++i) EXPECT_LT(mean_err[i], mean_err[i - 1]);
}

TEST(Calibrate, EquivariantUnderSceneRotation) {
  const Extrinsics truth = reference_extrinsics();
  const CalibrationResult a = calibrate(scan_planes(5, 10, 0.0, truth), Extrinsics{});
  const RigidTransform motion(rotation_y(0.7) * rotation_x(0.05), Vec3(0.1, 0.0, -0.2));
  const CalibrationResult b = calibrate(scan_planes(5, 10, 0.0, truth, motion), Extrinsics{});
  EXPECT_LT(rotation_error_deg(a.extrinsics, b.extrinsics), 1e-6);
  EXPECT_LT(translation_error_mm(a.extrinsics, b.extrinsics), 1e-6);
}

TEST(Calibrate, TooFewPlanesNamesParameters) {
  try {
    calibrate(scan_planes(6, 5, 0.0, reference_extrinsics()), Extrinsics{});
    FAIL() << "expected a degeneracy error";
  } catch (const DegeneracyError& e) {
    EXPECT_EQ(e.unconstrained(), (std::vector<std::string>{"roll", "yaw", "t_x", "t_z"}));
  }
}

TEST(Calibrate, HorizontalPlanesAreRejected) {
  // Every target normal along the rotation axis.
  SceneModel scene;
  for (int i = 0; i < 8; ++i) {
    const double h = (i % 2 == 0 ? 1.0 : -1.0) * (0.6 + 0.1 * i);
    const Mat3 r = rotation_x(-kPi / 2);  // rectangle normal -> +y
    const Vec3 c(2.0 * std::cos(0.8 * i), h, 2.0 * std::sin(0.8 * i));
    scene.primitives.push_back(Primitive::rectangle(i + 1, RigidTransform(r, c), 1.0, 1.0, 0.5f));
  }
  const auto ds = plane_datasets_from_scan(simulate_scan(scene, calibration_sensor_config(), reference_extrinsics(), 1));
  ASSERT_GE(ds.size(), 6u);
  EXPECT_THROW(calibrate(ds, Extrinsics{}), DegeneracyError);
}

TEST(PlaneDataset, NeedsTwentySamples) {
  PlaneDataset d;
  for (int i = 0; i < 19; ++i) d.samples.push_back({1.0, 1.0, 0.01 * i});
  EXPECT_THROW(d.validate(), Error);
}

}  // namespace
}  // namespace truckloc
