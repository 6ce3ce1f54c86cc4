#pragma once

#include <string>
#include <vector>

#include "truckloc/contour.hpp"
#include "truckloc/line_detection.hpp"
#include "truckloc/normals.hpp"
#include "truckloc/point_cloud.hpp"
#include "truckloc/segmentation.hpp"
#include "truckloc/world_frame.hpp"

namespace truckloc {

struct DetectConfig {
  double voxel_size = 0.02;  // 0 disables downsampling
  SegmentationParams segmentation;
  LineDetectParams lines;
  KeypointConfig keypoints;
  double coplanar_angle = deg2rad(5.0);  // regions closer than this share a fusion group
  double coplanar_offset_factor = 4.0;   // times s_k

  void validate() const;
};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct DetectResult {
  CompartmentResult compartment;
  std::vector<StageTiming> timings;
  std::size_t input_points = 0;
  std::size_t cropped_points = 0;
  std::size_t working_points = 0;
  double point_scale = 0.0;  // S_PS

  // Intermediate products for debug dumps, frame A.
  PointCloud working;
  Segmentation segmentation;
  std::vector<LineSegment3D> segments;

  double total_seconds() const;
};

/// Crop (frame A) then localize. Throws Error(kEmptyCrop) when nothing remains.
DetectResult detect(const PointCloud& cloud, const WorldFrame& world, const DetectConfig& config);

/// Localization on a cloud already in frame A; `viewpoint` is the sensor there.
DetectResult detect_in_frame_a(const PointCloud& cropped, const Vec3& viewpoint, const DetectConfig& config);

/// Downsampled cloud with its normals; depends only on voxel_size and k, so
/// parameter sweeps over the later stages can share it.
struct PreparedCloud {
  PointCloud working;
  NormalEstimate normals;
  double point_scale = 0.0;
  double d_mag = 0.0;  // distance of the first cropped point from the origin
  std::size_t cropped_points = 0;
  int k = 0;
  std::vector<StageTiming> timings;
};

PreparedCloud prepare_cloud(const PointCloud& cropped, const Vec3& viewpoint, double voxel_size, int k);

/// Segmentation through key points. config.segmentation.k must match the prepared k.
DetectResult localize_prepared(const PreparedCloud& prepared, const DetectConfig& config);

}  // namespace truckloc
