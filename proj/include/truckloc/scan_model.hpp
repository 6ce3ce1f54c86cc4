#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "truckloc/geometry.hpp"
#include "truckloc/point_cloud.hpp"

namespace truckloc {

/// Raw measurement of the rotating 2-D LiDAR: range r, beam azimuth theta in the
/// scan plane, platform encoder angle phi.
struct ScanSample {
  double range = 0.0;
  double azimuth = 0.0;
  double platform_angle = 0.0;
};

/// Acquisition geometry. Angles in radians, lengths in meters.
struct SensorConfig {
  double azimuth_min = deg2rad(45.0);
  double azimuth_max = deg2rad(315.0);
  double beam_resolution = deg2rad(0.25);
  double platform_min = 0.0;
  double platform_max = deg2rad(180.0);
  double platform_resolution = deg2rad(0.2);
  double scan_frequency_hz = 25.0;
  double range_noise_sigma = 0.002;
  double mount_height = 3.3;
  double min_range = 0.05;
  double max_range = 60.0;

  void validate() const;

  std::size_t beam_count() const;
  std::size_t line_count() const;
  double azimuth_at(std::size_t beam) const { return azimuth_min + static_cast<double>(beam) * beam_resolution; }
  double platform_at(std::size_t line) const {
    return platform_min + static_cast<double>(line) * platform_resolution;
  }
  /// One scan line per platform step at the configured scan frequency.
  double acquisition_time_s() const { return static_cast<double>(line_count()) / scan_frequency_hz; }
};

/// LiDAR-to-platform mounting: rotation R_w and translation t (meters).
struct Extrinsics {
  EulerAngles rotation;
  Vec3 translation = Vec3::Zero();

  Mat3 rotation_matrix() const { return euler_to_rotation(rotation); }
};

/// q = r (sin theta, cos theta, 0).
Vec3 polar_to_lidar_point(double range, double azimuth);

/// Unit beam direction in the LiDAR frame.
inline Vec3 beam_direction(double azimuth) { return {std::sin(azimuth), std::cos(azimuth), 0.0}; }

/// P = Q(phi) (R_w q + t).
Vec3 sample_to_world(const ScanSample& s, const Extrinsics& e);

/// Ray origin and unit direction of a beam in the platform frame.
struct BeamRay {
  Vec3 origin;
  Vec3 direction;
};
BeamRay beam_ray(double azimuth, double platform_angle, const Extrinsics& e);

PointCloud samples_to_cloud(std::span<const ScanSample> samples, std::span<const float> intensity,
                            const Extrinsics& e);

}  // namespace truckloc
