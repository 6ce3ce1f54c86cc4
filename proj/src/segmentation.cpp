#include "truckloc/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "truckloc/error.hpp"
#include "truckloc/plane_fit.hpp"

namespace truckloc {
namespace {

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

std::vector<Vec3> gather(std::span<const Vec3> points, const std::vector<std::size_t>& idx) {
  std::vector<Vec3> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(points[i]);
  return out;
}

}  // namespace

void SegmentationParams::validate() const {
  if (k < 3) throw Error(ErrorCode::kInvalidArgument, "segmentation k must be >= 3");
  if (!(delta >= 0.0 && delta < kPi / 2)) {
    throw Error(ErrorCode::kInvalidArgument, "segmentation delta must lie in [0, 90) degrees");
  }
  if (!(inlier_tolerance > 0.0)) throw Error(ErrorCode::kInvalidArgument, "inlier tolerance must be positive");
  if (!(max_seed_curvature > 0.0)) throw Error(ErrorCode::kInvalidArgument, "max seed curvature must be positive");
}

double point_scale(const NeighborTable& neighbors) {
  if (neighbors.k < 2) throw Error(ErrorCode::kInvalidArgument, "point scale needs at least one neighbour");
  std::vector<double> d(neighbors.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = std::sqrt(static_cast<double>(neighbors.dist_row(i)[1]));
  return median(std::move(d));
}

Segmentation region_grow(std::span<const Vec3> points, const NormalEstimate& normals,
                         const SegmentationParams& params) {
  params.validate();
  const std::size_t n = points.size();
  if (normals.normals.size() != n || normals.neighbors.size() != n) {
    throw Error(ErrorCode::kInvalidArgument, "normals do not match the cloud");
  }
  Segmentation out;
  out.labels.assign(n, -1);
  if (n == 0) return out;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return normals.curvature[a] < normals.curvature[b]; });

  const double cos_delta = std::cos(params.delta);
  std::vector<unsigned char> visited(n, 0);
  std::vector<std::size_t> queue;
  const auto& nb = normals.neighbors;

  for (std::size_t seed : order) {
    if (visited[seed]) continue;
    if (normals.curvature[seed] > params.max_seed_curvature) break;  // order is ascending
    const Vec3 seed_normal = normals.normals[seed];
    std::vector<std::size_t> members{seed};
    visited[seed] = 1;
    queue.assign(1, seed);
    for (std::size_t head = 0; head < queue.size(); ++head) {
      for (auto j : nb.row(queue[head])) {
        if (visited[j]) continue;
        if (std::abs(normals.normals[j].dot(seed_normal)) < cos_delta) continue;
        visited[j] = 1;
        members.push_back(j);
        queue.push_back(j);
      }
    }
    if (members.size() < std::max<std::size_t>(params.min_region_size, 3)) continue;

    // Fit, trim, refit, trim: the final members satisfy the bound w.r.t. the final plane.
    const double limit = 3.0 * params.inlier_tolerance;
    Plane plane;
    bool ok = true;
    for (int pass = 0; pass < 2 && ok; ++pass) {
      try {
        plane = fit_plane_least_squares(gather(points, members));
      } catch (const Error&) {
        ok = false;
        break;
      }
      std::erase_if(members, [&](std::size_t i) { return std::abs(plane.signed_distance(points[i])) > limit; });
      if (members.size() < std::max<std::size_t>(params.min_region_size, 3)) ok = false;
    }
    if (!ok) continue;
    std::sort(members.begin(), members.end());

    PlanarRegion region;
    region.plane = plane;
    region.seed = seed;
    region.seed_normal = seed_normal;
    std::vector<double> mean_knn;
    mean_knn.reserve(members.size());
    Vec3 centroid = Vec3::Zero();
    for (auto i : members) {
      centroid += points[i];
      const auto dr = nb.dist_row(i);
      double s = 0.0;
      for (std::size_t c = 1; c < dr.size(); ++c) s += std::sqrt(static_cast<double>(dr[c]));
      mean_knn.push_back(s / static_cast<double>(dr.size() - 1));
    }
    centroid /= static_cast<double>(members.size());
    region.scale = median(std::move(mean_knn));
    region.origin = plane.project(centroid);
    std::tie(region.u, region.v) = orthonormal_basis(plane.normal);
    const int label = static_cast<int>(out.regions.size());
    for (auto i : members) out.labels[i] = label;
    region.members = std::move(members);
    out.regions.push_back(std::move(region));
  }
  return out;
}

}  // namespace truckloc
