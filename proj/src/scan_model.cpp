#include "truckloc/scan_model.hpp"

#include <cmath>

#include "truckloc/error.hpp"

namespace truckloc {

namespace {

std::size_t grid_count(double lo, double hi, double step) {
  return static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
}

}  // namespace

void SensorConfig::validate() const {
  if (!(beam_resolution > 0.0) || !(platform_resolution > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "angular resolutions must be positive");
  }
  if (!(azimuth_max > azimuth_min) || azimuth_max - azimuth_min > deg2rad(270.0) + 1e-12) {
    throw Error(ErrorCode::kInvalidArgument, "scan sector must be non-empty and at most 270 degrees");
  }
  if (platform_max < platform_min) throw Error(ErrorCode::kInvalidArgument, "platform sweep is inverted");
  if (!(scan_frequency_hz > 0.0)) throw Error(ErrorCode::kInvalidArgument, "scan frequency must be positive");
  if (range_noise_sigma < 0.0) throw Error(ErrorCode::kInvalidArgument, "range noise must be non-negative");
  if (!(max_range > min_range) || min_range < 0.0) throw Error(ErrorCode::kInvalidArgument, "invalid range limits");
}

std::size_t SensorConfig::beam_count() const { return grid_count(azimuth_min, azimuth_max, beam_resolution); }

std::size_t SensorConfig::line_count() const {
  return grid_count(platform_min, platform_max, platform_resolution);
}

Vec3 polar_to_lidar_point(double range, double azimuth) {
  if (!(range > 0.0)) throw Error(ErrorCode::kInvalidArgument, "range must be positive");
  return range * beam_direction(azimuth);
}

Vec3 sample_to_world(const ScanSample& s, const Extrinsics& e) {
  const Vec3 q = polar_to_lidar_point(s.range, s.azimuth);
  return platform_rotation(s.platform_angle) * (e.rotation_matrix() * q + e.translation);
}

BeamRay beam_ray(double azimuth, double platform_angle, const Extrinsics& e) {
  const Mat3 q = platform_rotation(platform_angle);
  return {q * e.translation, q * (e.rotation_matrix() * beam_direction(azimuth))};
}

PointCloud samples_to_cloud(std::span<const ScanSample> samples, std::span<const float> intensity,
                            const Extrinsics& e) {
  if (!intensity.empty() && intensity.size() != samples.size()) {
    throw Error(ErrorCode::kInvalidArgument, "intensity count does not match sample count");
  }
  for (const auto& s : samples) {
    if (!(s.range > 0.0)) throw Error(ErrorCode::kInvalidArgument, "range must be positive");
  }
  PointCloud cloud;
  cloud.points.resize(samples.size());
  cloud.intensity.assign(samples.size(), 0.0f);
  const Mat3 rw = e.rotation_matrix();
  const auto n = static_cast<std::ptrdiff_t>(samples.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const ScanSample& s = samples[i];
    cloud.points[i] = platform_rotation(s.platform_angle) * (rw * (s.range * beam_direction(s.azimuth)) + e.translation);
  }
  if (!intensity.empty()) cloud.intensity.assign(intensity.begin(), intensity.end());
  return cloud;
}

}  // namespace truckloc
