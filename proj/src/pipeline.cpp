#include "truckloc/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "truckloc/error.hpp"
#include "truckloc/normals.hpp"

namespace truckloc {
namespace {

class Stopwatch {
 public:
  explicit Stopwatch(std::vector<StageTiming>& out) : out_(out) {}
  void lap(const char* stage) {
    const auto now = std::chrono::steady_clock::now();
    out_.push_back({stage, std::chrono::duration<double>(now - last_).count()});
    last_ = now;
  }

 private:
  std::vector<StageTiming>& out_;
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t i) {
  while (parent[i] != i) i = parent[i] = parent[parent[i]];
  return i;
}

}  // namespace

void DetectConfig::validate() const {
  if (voxel_size < 0.0) throw Error(ErrorCode::kInvalidArgument, "voxel_size must be >= 0");
  segmentation.validate();
  lines.validate();
  keypoints.fusion.validate();
  keypoints.cluster.validate();
  if (!(coplanar_angle > 0.0 && coplanar_offset_factor > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "coplanarity thresholds must be positive");
  }
}

double DetectResult::total_seconds() const {
  double t = 0.0;
  for (const auto& s : timings) t += s.seconds;
  return t;
}

DetectResult detect(const PointCloud& cloud, const WorldFrame& world, const DetectConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  PointCloud cropped = crop_to_parking(cloud, world.a_from_o, world.area, world.crop);
  const double crop_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (cropped.empty()) throw Error(ErrorCode::kEmptyCrop, "no vehicle in parking area");
  DetectResult r = detect_in_frame_a(cropped, world.a_from_o.translation(), config);
  r.input_points = cloud.size();
  r.timings.insert(r.timings.begin(), StageTiming{"crop", crop_s});
  return r;
}

PreparedCloud prepare_cloud(const PointCloud& cropped, const Vec3& viewpoint, double voxel_size, int k) {
  if (cropped.empty()) throw Error(ErrorCode::kEmptyCrop, "no vehicle in parking area");
  PreparedCloud p;
  p.k = k;
  p.cropped_points = cropped.size();
  p.d_mag = std::max(cropped.points.front().norm(), 1e-9);
  Stopwatch watch(p.timings);
  p.working = voxel_size > 0.0 ? voxel_downsample(cropped, voxel_size) : cropped;
  if (p.working.size() < static_cast<std::size_t>(k) + 1) {
    throw Error(ErrorCode::kEmptyCrop, "no vehicle in parking area (" + std::to_string(p.working.size()) +
                                           " points after downsampling)");
  }
  watch.lap("downsample");
  p.normals = estimate_normals(p.working.points, k, viewpoint);
  p.point_scale = point_scale(p.normals.neighbors);
  watch.lap("normals");
  return p;
}

DetectResult detect_in_frame_a(const PointCloud& cropped, const Vec3& viewpoint, const DetectConfig& config) {
  config.validate();
  PreparedCloud prepared = prepare_cloud(cropped, viewpoint, config.voxel_size, config.segmentation.k);
  DetectResult r = localize_prepared(prepared, config);
  r.timings.insert(r.timings.begin(), prepared.timings.begin(), prepared.timings.end());
  r.working = std::move(prepared.working);
  return r;
}

DetectResult localize_prepared(const PreparedCloud& prepared, const DetectConfig& config) {
  config.validate();
  if (config.segmentation.k != prepared.k) {
    throw Error(ErrorCode::kInvalidArgument, "prepared cloud was built with a different k");
  }
  DetectResult r;
  r.input_points = prepared.cropped_points;
  r.cropped_points = prepared.cropped_points;
  r.working_points = prepared.working.size();
  r.point_scale = prepared.point_scale;
  Stopwatch watch(r.timings);
  const PointCloud& working = prepared.working;

  r.segmentation = region_grow(working.points, prepared.normals, config.segmentation);
  watch.lap("segmentation");

  const auto& regions = r.segmentation.regions;
  std::vector<std::vector<LineSegment3D>> per_region(regions.size());
  const auto nreg = static_cast<std::ptrdiff_t>(regions.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < nreg; ++i) {
    const auto u = static_cast<std::size_t>(i);
    per_region[u] = detect_lines_in_plane(working.points, regions[u], config.lines, r.point_scale);
  }
  watch.lap("lines");

  // Coplanar regions share one fusion group.
  std::vector<std::size_t> parent(regions.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  const double cos_limit = std::cos(config.coplanar_angle);
  for (std::size_t i = 0; i < regions.size(); ++i) {
    for (std::size_t j = i + 1; j < regions.size(); ++j) {
      const auto& a = regions[i];
      const auto& b = regions[j];
      if (std::abs(a.plane.normal.dot(b.plane.normal)) < cos_limit) continue;
      const double tol = config.coplanar_offset_factor * std::max(a.scale, b.scale);
      if (std::abs(a.plane.signed_distance(b.origin)) > tol || std::abs(b.plane.signed_distance(a.origin)) > tol) {
        continue;
      }
      parent[find_root(parent, i)] = find_root(parent, j);
    }
  }
  std::vector<PlaneSegments> groups;
  std::vector<std::ptrdiff_t> group_of(regions.size(), -1);
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const std::size_t root = find_root(parent, i);
    if (group_of[root] < 0) {
      group_of[root] = static_cast<std::ptrdiff_t>(groups.size());
      groups.push_back({{}, 0.0});
    }
    auto& g = groups[static_cast<std::size_t>(group_of[root])];
    g.segments.insert(g.segments.end(), per_region[i].begin(), per_region[i].end());
    g.scale = std::max(g.scale, regions[i].scale);
    r.segments.insert(r.segments.end(), per_region[i].begin(), per_region[i].end());
  }
  std::erase_if(groups, [](const PlaneSegments& g) { return g.segments.empty(); });

  r.compartment = locate_keypoints(groups, prepared.d_mag, config.keypoints);
  watch.lap("keypoints");
  return r;
}

}  // namespace truckloc
