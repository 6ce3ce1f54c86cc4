#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "truckloc/geometry.hpp"

namespace truckloc {

struct PlaneFit {
  Plane plane;
  std::vector<bool> inliers;
  std::size_t inlier_count = 0;
  double max_inlier_residual = 0.0;
};

/// Total least squares (PCA) plane. Throws when fewer than 3 points or collinear.
Plane fit_plane_least_squares(std::span<const Vec3> points);

/// RANSAC over minimal 3-point samples, then least-squares refit on the inliers.
PlaneFit fit_plane_ransac(std::span<const Vec3> points, double dist_tol, int iterations, std::uint64_t seed = 0);

/// Covariance eigen-decomposition helper: eigenvalues ascending, matching eigenvectors.
struct PrincipalAxes {
  Vec3 centroid;
  Vec3 eigenvalues;
  Mat3 eigenvectors;
};
PrincipalAxes principal_axes(std::span<const Vec3> points);

}  // namespace truckloc
