#include "truckloc/plane_fit.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <optional>
#include <random>

#include "truckloc/error.hpp"

namespace truckloc {

PrincipalAxes principal_axes(std::span<const Vec3> points) {
  if (points.empty()) throw Error(ErrorCode::kInvalidArgument, "no points");
  Vec3 centroid = Vec3::Zero();
  for (const auto& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());
  Mat3 cov = Mat3::Zero();
  for (const auto& p : points) {
    const Vec3 d = p - centroid;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(points.size());
  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  return {centroid, eig.eigenvalues(), eig.eigenvectors()};
}

Plane fit_plane_least_squares(std::span<const Vec3> points) {
  if (points.size() < 3) throw Error(ErrorCode::kInvalidArgument, "plane fit needs at least 3 points");
  const PrincipalAxes axes = principal_axes(points);
  if (!(axes.eigenvalues[1] > 1e-12 * axes.eigenvalues[2]) || axes.eigenvalues[2] <= 0.0) {
    throw Error(ErrorCode::kDegenerate, "points are collinear; plane is undefined");
  }
  return Plane::from_point_normal(axes.centroid, axes.eigenvectors.col(0));
}

PlaneFit fit_plane_ransac(std::span<const Vec3> points, double dist_tol, int iterations, std::uint64_t seed) {
  if (points.size() < 3) throw Error(ErrorCode::kInvalidArgument, "RANSAC needs at least 3 points");
  if (!(dist_tol > 0.0)) throw Error(ErrorCode::kInvalidArgument, "RANSAC distance tolerance must be positive");

  const std::size_t n = points.size();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);

  auto count_inliers = [&](const Plane& plane) {
    std::size_t count = 0;
    for (const auto& p : points) count += std::abs(plane.signed_distance(p)) <= dist_tol ? 1 : 0;
    return count;
  };

  std::optional<Plane> best;
  std::size_t best_count = 0;
  const int trials = n == 3 ? 1 : std::max(1, iterations);
  for (int it = 0; it < trials; ++it) {
    std::size_t a = 0, b = 1, c = 2;
    if (n > 3) {
      a = pick(rng);
      do b = pick(rng); while (b == a);
      do c = pick(rng); while (c == a || c == b);
    }
    const Vec3 normal = (points[b] - points[a]).cross(points[c] - points[a]);
    const double scale = (points[b] - points[a]).norm() * (points[c] - points[a]).norm();
    if (!(normal.norm() > 1e-12 * scale)) continue;
    const Plane candidate = Plane::from_point_normal(points[a], normal);
    const std::size_t count = count_inliers(candidate);
    if (count > best_count) {
      best_count = count;
      best = candidate;
    }
  }
  if (!best) {
    // Every minimal sample was degenerate; decide on the whole set.
    best = fit_plane_least_squares(points);
  }

  PlaneFit fit;
  fit.plane = *best;
  for (int refine = 0; refine < 2; ++refine) {
    std::vector<Vec3> inlier_points;
    for (const auto& p : points) {
      if (std::abs(fit.plane.signed_distance(p)) <= dist_tol) inlier_points.push_back(p);
    }
    if (inlier_points.size() < 3) break;
    try {
      fit.plane = fit_plane_least_squares(inlier_points);
    } catch (const Error&) {
      break;
    }
  }

  fit.inliers.assign(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = std::abs(fit.plane.signed_distance(points[i]));
    if (d <= dist_tol) {
      fit.inliers[i] = true;
      ++fit.inlier_count;
      fit.max_inlier_residual = std::max(fit.max_inlier_residual, d);
    }
  }
  return fit;
}

}  // namespace truckloc
