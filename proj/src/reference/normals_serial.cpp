#include "truckloc/error.hpp"
#include "truckloc/normals.hpp"

namespace truckloc::reference {

NormalEstimate estimate_normals_serial(std::span<const Vec3> points, int k, const Vec3& viewpoint) {
  if (k < 3) throw Error(ErrorCode::kInvalidArgument, "normal estimation needs k >= 3");
  if (points.size() < static_cast<std::size_t>(k) + 1) {
    throw Error(ErrorCode::kInvalidArgument, "normal estimation needs at least k + 1 points");
  }
  NormalEstimate out;
  KdTree tree(points);
  std::vector<KdTree::Neighbor> found;
  out.neighbors.k = k + 1;
  out.neighbors.indices.reserve(points.size() * static_cast<std::size_t>(k + 1));
  out.neighbors.sq_dists.reserve(points.size() * static_cast<std::size_t>(k + 1));
  for (const auto& p : points) {
    tree.knn(p, k + 1, found);
    for (const auto& f : found) {
      out.neighbors.indices.push_back(f.index);
      out.neighbors.sq_dists.push_back(static_cast<float>(f.sq_dist));
    }
  }
  out.normals.resize(points.size());
  out.curvature.resize(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    detail::pca_normal(points, out.neighbors.row(i), viewpoint, out.normals[i], out.curvature[i]);
  }
  return out;
}

}  // namespace truckloc::reference
