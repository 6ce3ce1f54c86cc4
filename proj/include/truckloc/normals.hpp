#pragma once

#include <span>
#include <vector>

#include "truckloc/geometry.hpp"
#include "truckloc/kdtree.hpp"

namespace truckloc {

/// Per-point PCA over the point and its k nearest neighbours.
struct NormalEstimate {
  std::vector<Vec3> normals;       // unit, oriented toward the viewpoint
  std::vector<double> curvature;   // lambda_min / (lambda_0 + lambda_1 + lambda_2)
  NeighborTable neighbors;         // k + 1 columns, self first
};

/// Throws when the cloud has fewer than k + 1 points or k < 3.
NormalEstimate estimate_normals(std::span<const Vec3> points, int k, const Vec3& viewpoint);

namespace detail {

/// Normal and curvature from one neighbour row.
void pca_normal(std::span<const Vec3> points, std::span<const std::uint32_t> row, const Vec3& viewpoint, Vec3& normal,
                double& curvature);

}  // namespace detail

namespace reference {

NormalEstimate estimate_normals_serial(std::span<const Vec3> points, int k, const Vec3& viewpoint);

}  // namespace reference

}  // namespace truckloc
