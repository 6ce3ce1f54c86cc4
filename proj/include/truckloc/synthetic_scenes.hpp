#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "truckloc/calibration.hpp"
#include "truckloc/geometry.hpp"
#include "truckloc/scene.hpp"
#include "truckloc/world_frame.hpp"

namespace truckloc {

/// Platform frame placement in a z-up world: origin at `position`, O_y = world z
/// (rotation axis, up), O_x = (cos yaw, sin yaw, 0), O_z = O_x x O_y.
struct SensorPlacement {
  Vec3 position = Vec3::Zero();
  double yaw = 0.0;

  RigidTransform platform_to_world() const;
  RigidTransform world_to_platform() const { return platform_to_world().inverse(); }
};

/// Rectangular parking area with its corner P1 at the world origin, length along
/// world x and width along world y; the sensor hangs above the centre.
struct ParkingLayout {
  double length = 15.0;
  double width = 5.0;
  double mount_height = 3.3;
  double sensor_yaw = 0.0;
  double reflector_radius = 0.25;
  float reflector_intensity = 0.95f;
  float ground_intensity = 0.2f;
  bool surroundings = false;  // walls and a parked forklift outside the area

  /// P1..P4 counter-clockwise seen from above.
  std::array<Vec3, 4> corners() const;
  SensorPlacement sensor() const;
};

struct ClutterBox {
  Vec3 center = Vec3::Zero();  // truck frame
  Vec3 size = Vec3::Ones();
  double yaw = 0.0;
};

/// Fence truck. The compartment interior is [0,L]x[0,W]x[0,H] in the truck
/// frame whose origin sits at floor height.
struct TruckSpec {
  double length = 12.0;
  double width = 2.4;
  double height = 1.0;
  double floor_height = 1.1;
  double yaw = 0.0;
  Vec2 offset = Vec2::Zero();  // from the centred placement, meters
  bool rear_fence = true;
  std::vector<ClutterBox> clutter;

  static constexpr double kFenceThickness = 0.04;
  static constexpr double kSlabThickness = 0.2;

  RigidTransform truck_to_world(const ParkingLayout& layout) const;
  /// Interior corners in world frame: bottom face counter-clockwise from the
  /// truck-frame origin, then the top face in matching order.
  std::array<Vec3, 8> keypoints(const ParkingLayout& layout) const;
  std::string size_class() const;
};

std::string size_class_for_length(double length);

struct TruckGenOptions {
  double min_length = 5.0;
  double max_length = 13.0;
  double rear_fence_missing_probability = 0.4;
  double clutter_probability = 0.5;
  std::optional<double> length;  // overrides the draw
  double max_yaw = deg2rad(3.0);
  double max_offset = 0.3;
};

TruckSpec random_truck(std::uint64_t seed, const TruckGenOptions& options = {});

/// Ground plane and the four corner reflectors, world frame.
SceneModel make_parking_scene(const ParkingLayout& layout);

/// Parking scene plus the truck, world frame.
SceneModel make_truck_scene(const TruckSpec& truck, const ParkingLayout& layout);

/// Seed boxes (platform frame) around each corner board plus crop bounds for
/// the layout's mount height.
ParkingSetupConfig parking_setup_for(const ParkingLayout& layout, double seed_half_size = 0.6);

/// Target rectangles around the platform origin, platform frame.
struct CalibrationSceneOptions {
  int planes = 30;
  double size = 1.0;
  double min_distance = 1.6;
  double max_distance = 3.2;
  double max_height = 0.8;
  double max_yaw_tilt = deg2rad(35.0);
  double max_pitch_tilt = deg2rad(30.0);
};
SceneModel make_calibration_scene(std::uint64_t seed, const CalibrationSceneOptions& options = {});

/// Sensor setup used for calibration sweeps: full turn at 0.5 deg.
SensorConfig calibration_sensor_config();

/// Groups simulated samples by primitive id.
std::vector<PlaneDataset> plane_datasets_from_scan(const SimulatedScan& scan);

}  // namespace truckloc
