#pragma once

#include <array>
#include <string>
#include <vector>

#include "truckloc/geometry.hpp"
#include "truckloc/point_cloud.hpp"

namespace truckloc {

struct AxisBox {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  bool contains(const Vec3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
  void validate() const;
};

/// Coarse operator-provided search region for one corner board.
struct ReflectorSpec {
  std::string name;
  AxisBox seed_region;  // platform frame
  double intensity_threshold = 0.6;
  double expected_radius = 0.25;

  void validate() const;
};

struct ReflectorFit {
  Vec3 center = Vec3::Zero();
  Plane plane;
  double radius = 0.0;
  std::size_t support = 0;
  bool radius_warning = false;  // fitted radius off by more than 50%
};

/// Seed box + intensity gate, RANSAC board plane, then a circle fit to the
/// midpoints of board/background sample pairs across the rim (convex hull of
/// the inliers when too few pairs exist).
ReflectorFit locate_reflector(const PointCloud& cloud, const ReflectorSpec& spec, std::size_t min_points = 30);

struct CropBounds {
  double z_min = 0.3;
  double z_max = 3.0;

  static CropBounds for_mount_height(double mount_height, double margin = 0.3) {
    return {margin, mount_height - margin};
  }
  void validate() const;
};

/// Corner centres P1..P4 in the platform frame and the derived extents.
struct ParkingArea {
  std::array<Vec3, 4> corners;
  double x_max = 0.0;
  double y_max = 0.0;
  double coplanarity = 0.0;     // max corner distance to their plane, meters
  double rectangularity = 0.0;  // max relative opposite-side mismatch

  static constexpr double kMaxCoplanarity = 0.03;
  static constexpr double kMaxSideMismatch = 0.02;

  /// Measures the corners and throws Error(kWorldFrameInvalid) on violations.
  static ParkingArea from_corners(const std::array<Vec3, 4>& corners);
};

/// ^A_O T: maps platform-frame points into the parking frame A. Origin P1,
/// x toward P2, z the corner-plane normal on the sensor side, y = z cross x.
RigidTransform build_world_frame(const std::array<Vec3, 4>& corners);

struct WorldFrame {
  RigidTransform a_from_o;
  ParkingArea area;
  CropBounds crop;
};

/// Points inside 0<=x<=X_max, 0<=y<=Y_max, Z_min<=z<=Z_max, expressed in frame A.
PointCloud crop_to_parking(const PointCloud& cloud, const RigidTransform& a_from_o, const ParkingArea& area,
                           const CropBounds& bounds);

struct ParkingSetupConfig {
  std::array<ReflectorSpec, 4> reflectors;
  CropBounds crop;
};

/// Locates the four boards and builds frame A. Errors name the failing board.
WorldFrame setup_parking(const PointCloud& cloud, const ParkingSetupConfig& config,
                         std::array<ReflectorFit, 4>* fits = nullptr);

namespace reference {

PointCloud crop_to_parking_serial(const PointCloud& cloud, const RigidTransform& a_from_o, const ParkingArea& area,
                                  const CropBounds& bounds);

}  // namespace reference

}  // namespace truckloc
