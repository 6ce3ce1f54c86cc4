#include "truckloc/normals.hpp"

#include <Eigen/Eigenvalues>

#include "truckloc/error.hpp"

namespace truckloc {

namespace detail {

void pca_normal(std::span<const Vec3> points, std::span<const std::uint32_t> row, const Vec3& viewpoint, Vec3& normal,
                double& curvature) {
  Vec3 mean = Vec3::Zero();
  for (auto j : row) mean += points[j];
  mean /= static_cast<double>(row.size());
  Mat3 cov = Mat3::Zero();
  for (auto j : row) {
    const Vec3 d = points[j] - mean;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  const Vec3 ev = eig.eigenvalues();
  normal = eig.eigenvectors().col(0);
  const double total = ev.sum();
  curvature = total > 0.0 ? ev[0] / total : 0.0;
  if (normal.dot(viewpoint - points[row[0]]) < 0.0) normal = -normal;
}

}  // namespace detail

NormalEstimate estimate_normals(std::span<const Vec3> points, int k, const Vec3& viewpoint) {
  if (k < 3) throw Error(ErrorCode::kInvalidArgument, "normal estimation needs k >= 3");
  if (points.size() < static_cast<std::size_t>(k) + 1) {
    throw Error(ErrorCode::kInvalidArgument, "normal estimation needs at least k + 1 = " + std::to_string(k + 1) +
                                                 " points, got " + std::to_string(points.size()));
  }
  NormalEstimate out;
  out.neighbors = knn_table(points, k + 1);
  out.normals.resize(points.size());
  out.curvature.resize(points.size());
  const auto n = static_cast<std::ptrdiff_t>(points.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    detail::pca_normal(points, out.neighbors.row(u), viewpoint, out.normals[u], out.curvature[u]);
  }
  return out;
}

}  // namespace truckloc
