#include "truckloc/point_cloud.hpp"

#include <cmath>
#include <cstdint>
#include <unordered_map>

#include "truckloc/error.hpp"

namespace truckloc {

PointCloud PointCloud::transformed(const RigidTransform& t) const {
  PointCloud out;
  out.points.resize(points.size());
  out.intensity = intensity;
  const auto n = static_cast<std::ptrdiff_t>(points.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out.points[i] = t * points[i];
  return out;
}

PointCloud PointCloud::select(const std::vector<std::size_t>& indices) const {
  PointCloud out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(points[i], intensity[i]);
  return out;
}

PointCloud voxel_downsample(const PointCloud& cloud, double voxel_size) {
  if (voxel_size <= 0.0) return cloud;
  const double inv = 1.0 / voxel_size;

  struct Cell {
    Vec3 sum = Vec3::Zero();
    double intensity = 0.0;
    std::size_t count = 0;
  };
  std::unordered_map<std::uint64_t, std::size_t> lookup;
  lookup.reserve(cloud.size() / 2 + 1);
  std::vector<Cell> cells;

  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.points[i];
    // 21 bits per axis, offset so that +-10 km fits at 1 cm voxels.
    const auto key_of = [&](double v) {
      return static_cast<std::uint64_t>(static_cast<std::int64_t>(std::floor(v * inv)) + (1 << 20)) & 0x1fffff;
    };
    const std::uint64_t key = (key_of(p.x()) << 42) | (key_of(p.y()) << 21) | key_of(p.z());
    auto [it, inserted] = lookup.try_emplace(key, cells.size());
    if (inserted) cells.emplace_back();
    Cell& c = cells[it->second];
    c.sum += p;
    c.intensity += cloud.intensity[i];
    ++c.count;
  }

  PointCloud out;
  out.reserve(cells.size());
  for (const auto& c : cells) {
    const double n = static_cast<double>(c.count);
    out.push_back(c.sum / n, static_cast<float>(c.intensity / n));
  }
  return out;
}

}  // namespace truckloc
