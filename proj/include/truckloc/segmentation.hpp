#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "truckloc/geometry.hpp"
#include "truckloc/normals.hpp"

namespace truckloc {

struct SegmentationParams {
  int k = 33;
  double delta = deg2rad(19.0);     // max angle to the seed normal
  std::size_t min_region_size = 60;
  double inlier_tolerance = 0.02;   // members beyond 3x this from the fitted plane are dropped
  double max_seed_curvature = 0.05;  // points on creases never start a region

  void validate() const;
};

struct PlanarRegion {
  std::vector<std::size_t> members;
  Plane plane;
  double scale = 0.0;  // s_k: median over members of the mean k-NN distance
  Vec3 origin = Vec3::Zero();  // on the plane
  Vec3 u = Vec3::UnitX();      // in-plane basis
  Vec3 v = Vec3::UnitY();
  std::size_t seed = 0;
  Vec3 seed_normal = Vec3::UnitZ();

  Vec2 to_plane(const Vec3& p) const { return {(p - origin).dot(u), (p - origin).dot(v)}; }
  Vec3 from_plane(const Vec2& q) const { return origin + q.x() * u + q.y() * v; }
};

struct Segmentation {
  std::vector<PlanarRegion> regions;
  std::vector<int> labels;  // region index per point, -1 when unsegmented
};

/// Seeds in ascending curvature (ties by index) up to max_seed_curvature; a
/// neighbour joins when its normal is within delta of the seed normal. Regions
/// below min_region_size leave their points unsegmented.
Segmentation region_grow(std::span<const Vec3> points, const NormalEstimate& normals,
                         const SegmentationParams& params);

/// S_PS: median nearest-neighbour distance (second column of the table).
double point_scale(const NeighborTable& neighbors);

}  // namespace truckloc
