#pragma once

#include <cstddef>
#include <vector>

#include "truckloc/geometry.hpp"

namespace truckloc {

/// Ordered 3-D points with per-point intensity in [0, 1].
struct PointCloud {
  std::vector<Vec3> points;
  std::vector<float> intensity;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }

  void reserve(std::size_t n) {
    points.reserve(n);
    intensity.reserve(n);
  }

  void push_back(const Vec3& p, float i = 0.0f) {
    points.push_back(p);
    intensity.push_back(i);
  }

  PointCloud transformed(const RigidTransform& t) const;
  PointCloud select(const std::vector<std::size_t>& indices) const;
};

/// Centroid-per-voxel downsampling; output order follows first occupancy.
PointCloud voxel_downsample(const PointCloud& cloud, double voxel_size);

}  // namespace truckloc
