#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "truckloc/geometry.hpp"

namespace truckloc {

/// k nearest neighbours of every point, row-major (point i owns slots [i*k, (i+1)*k)).
/// Each row is sorted by ascending distance and includes the point itself.
struct NeighborTable {
  int k = 0;
  std::vector<std::uint32_t> indices;
  std::vector<float> sq_dists;

  std::size_t size() const { return k == 0 ? 0 : indices.size() / static_cast<std::size_t>(k); }
  std::span<const std::uint32_t> row(std::size_t i) const {
    return {indices.data() + i * static_cast<std::size_t>(k), static_cast<std::size_t>(k)};
  }
  std::span<const float> dist_row(std::size_t i) const {
    return {sq_dists.data() + i * static_cast<std::size_t>(k), static_cast<std::size_t>(k)};
  }
};

/// Static 3-D kd-tree over a borrowed point array.
class KdTree {
 public:
  struct Neighbor {
    std::uint32_t index;
    double sq_dist;
  };

  explicit KdTree(std::span<const Vec3> points, int leaf_size = 12);

  /// The k nearest points to query, ascending by distance (ties by index).
  void knn(const Vec3& query, int k, std::vector<Neighbor>& out) const;

  std::size_t size() const { return points_.size(); }

 private:
  struct Node {
    std::uint32_t begin;
    std::uint32_t end;
    std::int32_t left = -1;
    std::int32_t right = -1;
    int axis = 0;
    double split = 0.0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  void search(std::int32_t node, const Vec3& q, int k, std::vector<Neighbor>& heap) const;

  std::span<const Vec3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
  int leaf_size_;
};

/// Parallel batch query over all points of the tree's own cloud.
NeighborTable knn_table(std::span<const Vec3> points, int k);

}  // namespace truckloc
