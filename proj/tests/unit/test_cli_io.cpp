#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "truckloc/cloud_io.hpp"
#include "truckloc/error.hpp"
#include "truckloc/serialization.hpp"

namespace fs = std::filesystem;

namespace truckloc {
namespace {

// Value that survives a trip through 9 significant digits.
double nine_digits(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return std::strtod(buf, nullptr);
}

PointCloud random_cloud(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-50.0, 50.0), i(0.0, 1.0);
  PointCloud c;
  for (std::size_t k = 0; k < n; ++k) {
    c.push_back({nine_digits(u(rng)), nine_digits(u(rng)), nine_digits(u(rng))}, static_cast<float>(i(rng)));
  }
  return c;
}

void expect_bit_exact(const PointCloud& a, const PointCloud& b) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    ASSERT_EQ(a.points[k], b.points[k]) << k;
    ASSERT_EQ(a.intensity[k], b.intensity[k]) << k;
  }
}

TEST(CloudIo, PcdRoundTripIsBitExact) {
  const PointCloud c = random_cloud(2000, 1);
  std::stringstream s;
  write_pcd(s, c);
  expect_bit_exact(c, read_pcd(s));
}

TEST(CloudIo, PlyRoundTripIsBitExact) {
  const PointCloud c = random_cloud(2000, 2);
  std::stringstream s;
  write_ply(s, c);
  expect_bit_exact(c, read_ply(s));
}

TEST(CloudIo, EmptyCloudRoundTrips) {
  std::stringstream a, b;
  write_pcd(a, {});
  write_ply(b, {});
  EXPECT_TRUE(read_pcd(a).empty());
  EXPECT_TRUE(read_ply(b).empty());
}

TEST(CloudIo, HeaderCountMismatchIsRejected) {
  std::stringstream s;
  write_pcd(s, random_cloud(5, 3));
  std::string text = s.str();
  text = text.substr(0, text.rfind('\n', text.size() - 2) + 1);  // drop the last point
  std::stringstream truncated(text);
  EXPECT_THROW(read_pcd(truncated), Error);

  std::stringstream p;
  write_ply(p, random_cloud(5, 4));
  std::string ply = p.str() + "1 2 3 0.5\n";
  std::stringstream extra(ply);
  EXPECT_THROW(read_ply(extra), Error);
}

TEST(CloudIo, NonFiniteCoordinateIsRejected) {
  std::stringstream s("ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\n"
                      "property float z\nend_header\nnan 0 0\n");
  EXPECT_THROW(read_ply(s), Error);
}

TEST(CloudIo, FormatFollowsExtension) {
  EXPECT_EQ(cloud_format_for("a/b.pcd"), CloudFormat::kPcd);
  EXPECT_EQ(cloud_format_for("a/b.ply"), CloudFormat::kPly);
  EXPECT_THROW(cloud_format_for("a/b.xyz"), Error);
}

TEST(Serialization, SensorAndExtrinsicsRoundTrip) {
  SensorConfig s;
  s.beam_resolution = deg2rad(0.5);
  s.range_noise_sigma = 0.004;
  const SensorConfig back = sensor_from_json(sensor_to_json(s));
  EXPECT_NEAR(back.beam_resolution, s.beam_resolution, 1e-15);
  EXPECT_EQ(back.range_noise_sigma, s.range_noise_sigma);
  EXPECT_NEAR(back.azimuth_max, s.azimuth_max, 1e-15);

  Extrinsics e;
  e.rotation = {deg2rad(-1.5), deg2rad(0.2), deg2rad(-0.5)};
  e.translation = {0.015, 0.0, 0.12};
  const Extrinsics eb = extrinsics_from_json(extrinsics_to_json(e));
  EXPECT_NEAR(eb.rotation.roll, e.rotation.roll, 1e-15);
  EXPECT_NEAR(eb.rotation.yaw, e.rotation.yaw, 1e-15);
  EXPECT_EQ(eb.translation, e.translation);
}

TEST(Serialization, SceneAndAnnotationRoundTrip) {
  SceneDocument doc;
  doc.scene.primitives.push_back(Primitive::box(3, {1, 2, 3}, {2, 1, 0.5}, 0.3, 0.4f, "crate"));
  doc.scene.primitives.push_back(Primitive::disc(4, {0, 0, 1}, {0, 0, 1}, 0.1, 0.9f, "P1"));
  doc.sensor = SensorPlacement{{0, 0, 3.3}, 0.0};
  const SceneDocument back = scene_from_json(scene_to_json(doc));
  ASSERT_EQ(back.scene.primitives.size(), 2u);
  EXPECT_EQ(back.scene.primitives[0].label, "crate");
  EXPECT_TRUE(back.scene.primitives[0].pose.matrix().isApprox(doc.scene.primitives[0].pose.matrix(), 1e-15));
  ASSERT_TRUE(back.sensor.has_value());

  Annotation a;
  a.id = "t1";
  a.size_class = "large";
  a.dims = {12, 2.4, 2.7};
  for (int i = 0; i < 8; ++i) a.points[i] = Vec3(i, 2 * i, 0.5);
  const Annotation ab = annotation_from_json(annotation_to_json(a));
  EXPECT_EQ(ab.id, a.id);
  EXPECT_EQ(ab.dims, a.dims);
  for (int i = 0; i < 8; ++i) EXPECT_EQ(ab.points[i], a.points[i]);
}

TEST(Serialization, MalformedInputIsAParseError) {
  try {
    scene_from_json(Json::parse(R"({"primitives": [{"type": "cone", "id": 1}]})"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParse);
  }
  EXPECT_THROW(scene_from_json(Json::parse(R"({"schema_version": 99, "primitives": []})")), Error);
}

// --- command line -------------------------------------------------------------------------

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::path(::testing::TempDir()) / ("truckloc_cli_" + std::string(
        ::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }

  int run(const std::string& args) const {
    const std::string cmd = std::string(TRUCKLOC_CLI) + " " + args + " > " + (dir_ / "log.txt").string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void write(const std::string& name, const std::string& text) const { std::ofstream(dir_ / name) << text; }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
  }

  fs::path dir_;
};

constexpr const char* kCoarseConfig = R"({
  "schema_version": 1,
  "sensor": {"beam_resolution_deg": 1.0, "platform_resolution_deg": 1.0, "range_noise_sigma_m": 0.0}
})";

TEST_F(Cli, EnclosingBoxCountMatchesGrid) {
  write("cfg.json", kCoarseConfig);
  write("scene.json", R"({"primitives": [{"type": "box", "id": 1, "center": [0, 0, 0], "size": [20, 20, 20]}]})");
  ASSERT_EQ(run("--config " + path("cfg.json") + " simulate --scene " + path("scene.json") + " --out " +
                path("c.pcd")),
            0);
  // 271 beams over 45..315 deg, 181 lines over 0..180 deg.
  EXPECT_EQ(read_cloud(path("c.pcd")).size(), 271u * 181u);
}

TEST_F(Cli, EmptySceneGivesEmptyFile) {
  write("cfg.json", kCoarseConfig);
  write("scene.json", R"({"primitives": []})");
  ASSERT_EQ(run("--config " + path("cfg.json") + " simulate --scene " + path("scene.json") + " --out " +
                path("c.ply")),
            0);
  EXPECT_TRUE(read_cloud(path("c.ply")).empty());
}

TEST_F(Cli, SimulateIsDeterministic) {
  write("scene.json", R"({"primitives": [{"type": "box", "id": 1, "center": [2, 0, 0], "size": [1, 1, 1]}]})");
  const std::string base = "--seed 7 simulate --scene " + path("scene.json") + " --out ";
  ASSERT_EQ(run(base + path("a.pcd")), 0);
  ASSERT_EQ(run(base + path("b.pcd")), 0);
  EXPECT_EQ(slurp(path("a.pcd")), slurp(path("b.pcd")));
  ASSERT_EQ(run("--seed 8 simulate --scene " + path("scene.json") + " --out " + path("c.pcd")), 0);
  EXPECT_NE(slurp(path("a.pcd")), slurp(path("c.pcd")));
}

TEST_F(Cli, MalformedSceneExitsTwo) {
  write("scene.json", R"({"primitives": [{"type": "pyramid", "id": 1}]})");
  EXPECT_EQ(run("simulate --scene " + path("scene.json") + " --out " + path("c.pcd")), 2);
  write("broken.json", "{\"primitives\": [");
  EXPECT_EQ(run("simulate --scene " + path("broken.json") + " --out " + path("c.pcd")), 2);
  EXPECT_EQ(run("frobnicate"), 2);
}

TEST_F(Cli, CalibrateRecoversInjectedExtrinsics) {
  write("cfg.json", R"({"extrinsics": {"roll_deg": -1.5, "pitch_deg": 0, "yaw_deg": -0.5,
                                        "t_x_m": 0.015, "t_y_m": 0, "t_z_m": 0.12}})");
  ASSERT_EQ(run("--seed 3 --config " + path("cfg.json") + " simulate --generate calibration --out " + path("c.pcd") +
                " --samples " + path("planes.json")),
            0);
  write("init.json", R"({"extrinsics": {"roll_deg": 0, "pitch_deg": 0, "yaw_deg": 0,
                                         "t_x_m": 0, "t_y_m": 0, "t_z_m": 0}})");
  ASSERT_EQ(run("calibrate --planes " + path("planes.json") + " --init " + path("init.json") + " --out " +
                path("calib.json")),
            0);
  const Extrinsics e = extrinsics_from_document(load_json(path("calib.json")));
  EXPECT_NEAR(rad2deg(e.rotation.roll), -1.5, 0.1);
  EXPECT_NEAR(rad2deg(e.rotation.yaw), -0.5, 0.1);
  EXPECT_NEAR(e.translation.x(), 0.015, 0.002);
  EXPECT_NEAR(e.translation.z(), 0.12, 0.002);
}

TEST_F(Cli, CalibrateFailures) {
  EXPECT_EQ(run("calibrate --planes " + path("missing.csv") + " --out " + path("calib.json")), 2);
  ASSERT_EQ(run("simulate --generate calibration --out " + path("c.pcd") + " --samples " + path("planes.json")), 0);
  Json planes = load_json(path("planes.json"));
  planes["planes"] = Json::array({planes["planes"][0]});
  write("one.json", planes.dump());
  EXPECT_EQ(run("calibrate --planes " + path("one.json") + " --out " + path("calib.json")), 3);
  const std::string log = slurp(path("log.txt"));
  EXPECT_NE(log.find("roll"), std::string::npos) << log;
  EXPECT_NE(log.find("t_x"), std::string::npos) << log;
}

TEST_F(Cli, ParkingDetectEvalFlow) {
  ASSERT_EQ(run("simulate --generate parking --out " + path("park.pcd") + " --parking-config " +
                path("reflectors.json")),
            0);
  ASSERT_EQ(run("setup-parking --cloud " + path("park.pcd") + " --reflectors " + path("reflectors.json") +
                " --out " + path("world_a.json")),
            0);
  ASSERT_EQ(run("setup-parking --cloud " + path("park.pcd") + " --reflectors " + path("reflectors.json") +
                " --out " + path("world_b.json")),
            0);
  EXPECT_EQ(slurp(path("world_a.json")), slurp(path("world_b.json")));

  ASSERT_EQ(run("--seed 11 simulate --generate truck --length 12 --clutter off --rear-fence on --id t11 --out " +
                path("t11.pcd") + " --truth " + path("t11_truth.json")),
            0);
  fs::create_directories(dir_ / "results");
  ASSERT_EQ(run("detect " + path("t11.pcd") + " --world " + path("world_a.json") + " --id t11 --out " +
                path("results/t11.json")),
            0);
  ASSERT_EQ(run("eval --results " + path("results") + " --annotations " + path("t11_truth.json") + " --report " +
                path("report.json")),
            0);
  const Json report = load_json(path("report.json"));
  EXPECT_EQ(report.at("vehicles").at(0).at("pass_5").get<bool>(), true);

  write("other.json", annotation_to_json([] {
                        Annotation a;
                        a.id = "nobody";
                        a.size_class = "small";
                        a.dims = {1, 1, 1};
                        a.points.fill(Vec3::Zero());
                        return a;
                      }()).dump());
  EXPECT_EQ(run("eval --results " + path("results") + " --annotations " + path("other.json")), 6);
}

TEST_F(Cli, DetectStageFailures) {
  ASSERT_EQ(run("simulate --generate parking --out " + path("park.pcd") + " --parking-config " +
                path("reflectors.json")),
            0);
  ASSERT_EQ(run("setup-parking --cloud " + path("park.pcd") + " --reflectors " + path("reflectors.json") +
                " --out " + path("world.json")),
            0);
  // Floor-only cloud: nothing inside the crop volume.
  write("scene.json", R"({"sensor": {"position": [0, 0, 3.3]},
    "primitives": [{"type": "rectangle", "id": 1, "center": [0, 0, 0], "size": [40, 40], "intensity": 0.2}]})");
  ASSERT_EQ(run("simulate --scene " + path("scene.json") + " --out " + path("floor.pcd")), 0);
  EXPECT_EQ(run("detect " + path("floor.pcd") + " --world " + path("world.json") + " --out " + path("err.json")), 5);
  EXPECT_TRUE(load_json(path("err.json")).contains("error"));

  // Remove one reflector from the parking cloud.
  Json refl = load_json(path("reflectors.json"));
  refl["reflectors"][2]["seed_min"] = {100.0, 100.0, 100.0};
  refl["reflectors"][2]["seed_max"] = {101.0, 101.0, 101.0};
  write("bad_reflectors.json", refl.dump());
  EXPECT_EQ(run("setup-parking --cloud " + path("park.pcd") + " --reflectors " + path("bad_reflectors.json") +
                " --out " + path("w.json")),
            4);
  EXPECT_NE(slurp(path("log.txt")).find(refl["reflectors"][2]["name"].get<std::string>()), std::string::npos);
}

}  // namespace
}  // namespace truckloc
