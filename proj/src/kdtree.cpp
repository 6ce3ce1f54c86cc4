#include "truckloc/kdtree.hpp"

#include <algorithm>

#include "truckloc/error.hpp"

namespace truckloc {

namespace {

bool closer(const KdTree::Neighbor& a, const KdTree::Neighbor& b) {
  return a.sq_dist < b.sq_dist || (a.sq_dist == b.sq_dist && a.index < b.index);
}

}  // namespace

KdTree::KdTree(std::span<const Vec3> points, int leaf_size)
    : points_(points), leaf_size_(std::max(1, leaf_size)) {
  order_.resize(points_.size());
  for (std::uint32_t i = 0; i < order_.size(); ++i) order_[i] = i;
  nodes_.reserve(2 * points_.size() / static_cast<std::size_t>(leaf_size_) + 1);
  if (!points_.empty()) build(0, static_cast<std::uint32_t>(points_.size()));
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  if (end - begin <= static_cast<std::uint32_t>(leaf_size_)) return id;

  Vec3 lo = points_[order_[begin]], hi = lo;
  for (std::uint32_t i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  if (hi[axis] - lo[axis] <= 0.0) return id;  // all coincident

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) { return points_[a][axis] < points_[b][axis]; });
  const double split = points_[order_[mid]][axis];

  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  Node& node = nodes_[id];
  node.left = left;
  node.right = right;
  node.axis = axis;
  node.split = split;
  return id;
}

void KdTree::search(std::int32_t id, const Vec3& q, int k, std::vector<Neighbor>& heap) const {
  const Node& node = nodes_[id];
  if (node.left < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const std::uint32_t idx = order_[i];
      const Neighbor cand{idx, (points_[idx] - q).squaredNorm()};
      if (static_cast<int>(heap.size()) < k) {
        heap.push_back(cand);
        std::push_heap(heap.begin(), heap.end(), closer);
      } else if (closer(cand, heap.front())) {
        std::pop_heap(heap.begin(), heap.end(), closer);
        heap.back() = cand;
        std::push_heap(heap.begin(), heap.end(), closer);
      }
    }
    return;
  }
  const double diff = q[node.axis] - node.split;
  const std::int32_t near = diff < 0.0 ? node.left : node.right;
  const std::int32_t far = diff < 0.0 ? node.right : node.left;
  search(near, q, k, heap);
  if (static_cast<int>(heap.size()) < k || diff * diff <= heap.front().sq_dist) search(far, q, k, heap);
}

void KdTree::knn(const Vec3& query, int k, std::vector<Neighbor>& out) const {
  out.clear();
  if (k <= 0 || nodes_.empty()) return;
  out.reserve(static_cast<std::size_t>(k));
  search(0, query, k, out);
  std::sort_heap(out.begin(), out.end(), closer);
}

NeighborTable knn_table(std::span<const Vec3> points, int k) {
  if (k <= 0) throw Error(ErrorCode::kInvalidArgument, "k must be positive");
  if (points.size() < static_cast<std::size_t>(k)) {
    throw Error(ErrorCode::kInvalidArgument, "fewer points than requested neighbours");
  }
  const KdTree tree(points);
  NeighborTable table;
  table.k = k;
  table.indices.resize(points.size() * static_cast<std::size_t>(k));
  table.sq_dists.resize(points.size() * static_cast<std::size_t>(k));

  const auto n = static_cast<std::ptrdiff_t>(points.size());
#pragma omp parallel
  {
    std::vector<KdTree::Neighbor> nbrs;
#pragma omp for schedule(dynamic, 512)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      tree.knn(points[i], k, nbrs);
      const std::size_t base = static_cast<std::size_t>(i) * static_cast<std::size_t>(k);
      for (int j = 0; j < k; ++j) {
        table.indices[base + j] = nbrs[j].index;
        table.sq_dists[base + j] = static_cast<float>(nbrs[j].sq_dist);
      }
    }
  }
  return table;
}

}  // namespace truckloc
