#include "truckloc/synthetic_scenes.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

namespace truckloc {
namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Box given by its min/max corners in a local frame, mapped by `pose`.
Primitive local_box(int id, const RigidTransform& pose, const Vec3& lo, const Vec3& hi, float intensity,
                    std::string label) {
  Primitive p;
  p.kind = PrimitiveKind::kBox;
  p.id = id;
  p.label = std::move(label);
  p.pose = pose * RigidTransform::from_translation(0.5 * (lo + hi));
  p.half_extents = 0.5 * (hi - lo);
  p.intensity = intensity;
  return p;
}

}  // namespace

RigidTransform SensorPlacement::platform_to_world() const {
  Mat3 r;
  const Vec3 ox(std::cos(yaw), std::sin(yaw), 0.0);
  const Vec3 oy = Vec3::UnitZ();
  r.col(0) = ox;
  r.col(1) = oy;
  r.col(2) = ox.cross(oy);
  return {r, position};
}

std::array<Vec3, 4> ParkingLayout::corners() const {
  return {Vec3(0, 0, 0), Vec3(length, 0, 0), Vec3(length, width, 0), Vec3(0, width, 0)};
}

SensorPlacement ParkingLayout::sensor() const {
  return {Vec3(0.5 * length, 0.5 * width, mount_height), sensor_yaw};
}

RigidTransform TruckSpec::truck_to_world(const ParkingLayout& layout) const {
  const Mat3 r = rotation_z(yaw);
  const Vec3 centre(0.5 * layout.length + offset.x(), 0.5 * layout.width + offset.y(), floor_height);
  return {r, centre - r * Vec3(0.5 * length, 0.5 * width, 0.0)};
}

std::array<Vec3, 8> TruckSpec::keypoints(const ParkingLayout& layout) const {
  const RigidTransform t = truck_to_world(layout);
  const double l = length, w = width, h = height;
  return {t * Vec3(0, 0, 0), t * Vec3(l, 0, 0), t * Vec3(l, w, 0), t * Vec3(0, w, 0),
          t * Vec3(0, 0, h), t * Vec3(l, 0, h), t * Vec3(l, w, h), t * Vec3(0, w, h)};
}

std::string size_class_for_length(double length) {
  if (length >= 10.0) return "large";
  if (length >= 7.5) return "medium";
  return "small";
}

std::string TruckSpec::size_class() const { return size_class_for_length(length); }

TruckSpec random_truck(std::uint64_t seed, const TruckGenOptions& options) {
  std::mt19937_64 rng(seed);
  TruckSpec t;
  t.length = uniform(rng, options.min_length, options.max_length);
  if (options.length) t.length = *options.length;
  t.width = uniform(rng, 1.9, 2.5);
  t.height = uniform(rng, 0.5, 1.5);
  t.floor_height = uniform(rng, 0.9, 1.3);
  t.height = std::min(t.height, 2.8 - t.floor_height);
  t.yaw = uniform(rng, -options.max_yaw, options.max_yaw);
  t.offset = Vec2(uniform(rng, -options.max_offset, options.max_offset),
                  uniform(rng, -options.max_offset, options.max_offset));
  t.rear_fence = uniform(rng, 0.0, 1.0) >= options.rear_fence_missing_probability;
  if (uniform(rng, 0.0, 1.0) < options.clutter_probability) {
    const int count = std::uniform_int_distribution<int>(1, 3)(rng);
    const double margin = 0.15;
    for (int i = 0; i < count; ++i) {
      ClutterBox b;
      b.size = Vec3(uniform(rng, 0.4, 1.5), uniform(rng, 0.4, std::min(1.2, t.width - 0.8)),
                    uniform(rng, 0.3, 0.8 * t.height));
      b.yaw = uniform(rng, -0.3, 0.3);
      const double reach = 0.5 * std::hypot(b.size.x(), b.size.y()) + margin;
      b.center = Vec3(uniform(rng, reach, t.length - reach), uniform(rng, reach, std::max(reach, t.width - reach)),
                      0.5 * b.size.z());
      t.clutter.push_back(b);
    }
  }
  return t;
}

SceneModel make_parking_scene(const ParkingLayout& layout) {
  SceneModel scene;
  const Vec3 centre(0.5 * layout.length, 0.5 * layout.width, -0.001);
  scene.primitives.push_back(Primitive::rectangle(1, RigidTransform::from_translation(centre), layout.length + 16.0,
                                                  layout.width + 16.0, layout.ground_intensity, "ground"));
  int id = 10;
  for (const auto& c : layout.corners()) {
    scene.primitives.push_back(
        Primitive::disc(id, c, Vec3::UnitZ(), layout.reflector_radius, layout.reflector_intensity,
                        "reflector_P" + std::to_string(id - 9)));
    ++id;
  }
  if (layout.surroundings) {
    scene.primitives.push_back(Primitive::box(20, Vec3(0.5 * layout.length, -2.5, 1.5),
                                              Vec3(layout.length + 6.0, 0.2, 3.0), 0.0, 0.4f, "wall"));
    scene.primitives.push_back(Primitive::box(21, Vec3(0.5 * layout.length, layout.width + 2.5, 1.5),
                                              Vec3(layout.length + 6.0, 0.2, 3.0), 0.0, 0.4f, "wall"));
    scene.primitives.push_back(
        Primitive::box(22, Vec3(layout.length + 1.8, 1.0, 1.0), Vec3(2.2, 1.1, 2.0), 0.4, 0.5f, "forklift"));
  }
  return scene;
}

ParkingSetupConfig parking_setup_for(const ParkingLayout& layout, double seed_half_size) {
  ParkingSetupConfig cfg;
  const RigidTransform to_platform = layout.sensor().world_to_platform();
  const auto corners = layout.corners();
  for (std::size_t i = 0; i < 4; ++i) {
    const Vec3 c = to_platform * corners[i];
    const Vec3 half(seed_half_size, 0.3, seed_half_size);
    cfg.reflectors[i].name = "P" + std::to_string(i + 1);
    cfg.reflectors[i].seed_region = {c - half, c + half};
    cfg.reflectors[i].expected_radius = layout.reflector_radius;
  }
  cfg.crop = CropBounds::for_mount_height(layout.mount_height);
  return cfg;
}

SceneModel make_truck_scene(const TruckSpec& truck, const ParkingLayout& layout) {
  SceneModel scene = make_parking_scene(layout);
  const RigidTransform pose = truck.truck_to_world(layout);
  const double l = truck.length, w = truck.width, h = truck.height;
  const double ft = TruckSpec::kFenceThickness;
  const double rear = truck.rear_fence ? l + ft : l;
  const float body = 0.45f;
  scene.primitives.push_back(
      local_box(100, pose, Vec3(-ft, -ft, -TruckSpec::kSlabThickness), Vec3(rear, w + ft, 0.0), body, "floor"));
  scene.primitives.push_back(local_box(101, pose, Vec3(0, -ft, 0), Vec3(l, 0, h), body, "side_fence"));
  scene.primitives.push_back(local_box(102, pose, Vec3(0, w, 0), Vec3(l, w + ft, h), body, "side_fence"));
  scene.primitives.push_back(local_box(103, pose, Vec3(-ft, -ft, 0), Vec3(0, w + ft, h), body, "front_fence"));
  if (truck.rear_fence) {
    scene.primitives.push_back(local_box(104, pose, Vec3(l, -ft, 0), Vec3(l + ft, w + ft, h), body, "rear_fence"));
  }
  int id = 200;
  for (const auto& c : truck.clutter) {
    Primitive p = Primitive::box(id++, Vec3::Zero(), c.size, c.yaw, 0.6f, "clutter");
    p.pose = pose * RigidTransform(rotation_z(c.yaw), c.center);
    scene.primitives.push_back(p);
  }
  return scene;
}

SceneModel make_calibration_scene(std::uint64_t seed, const CalibrationSceneOptions& options) {
  std::mt19937_64 rng(seed);
  SceneModel scene;
  const double step = 2.0 * kPi / options.planes;
  for (int i = 0; i < options.planes; ++i) {
    const double azimuth = (i + uniform(rng, 0.2, 0.8)) * step;
    const double dist = uniform(rng, options.min_distance, options.max_distance);
    const double height = uniform(rng, -options.max_height, options.max_height);
    // Platform frame: y is the rotation axis, the horizontal plane is x-z.
    const Vec3 centre(dist * std::cos(azimuth), height, dist * std::sin(azimuth));
    const Vec3 toward = -Vec3(centre.x(), 0.0, centre.z()).normalized();
    const double yaw_tilt = uniform(rng, -options.max_yaw_tilt, options.max_yaw_tilt);
    const double pitch_tilt = uniform(rng, -options.max_pitch_tilt, options.max_pitch_tilt);
    Vec3 n = rotation_y(yaw_tilt) * toward;
    const Vec3 side = Vec3::UnitY().cross(n).normalized();
    n = Eigen::AngleAxisd(pitch_tilt, side) * n;
    Mat3 r;
    r.col(2) = n.normalized();
    r.col(0) = side;
    r.col(1) = r.col(2).cross(r.col(0));
    scene.primitives.push_back(
        Primitive::rectangle(i + 1, RigidTransform(r, centre), options.size, options.size, 0.5f, "target"));
  }
  return scene;
}

SensorConfig calibration_sensor_config() {
  SensorConfig cfg;
  cfg.platform_min = 0.0;
  cfg.platform_max = deg2rad(359.5);
  cfg.platform_resolution = deg2rad(0.5);
  return cfg;
}

std::vector<PlaneDataset> plane_datasets_from_scan(const SimulatedScan& scan) {
  std::map<int, PlaneDataset> by_id;
  for (std::size_t i = 0; i < scan.size(); ++i) {
    auto& d = by_id[scan.primitive_id[i]];
    d.id = scan.primitive_id[i];
    d.samples.push_back(scan.samples[i]);
  }
  std::vector<PlaneDataset> out;
  for (auto& [id, d] : by_id) out.push_back(std::move(d));
  return out;
}

}  // namespace truckloc
