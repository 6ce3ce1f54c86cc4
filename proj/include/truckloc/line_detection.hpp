#pragma once

#include <optional>
#include <span>
#include <vector>

#include "truckloc/geometry.hpp"
#include "truckloc/segmentation.hpp"

namespace truckloc {

struct LineDetectParams {
  std::optional<double> outlier_threshold;  // th_O, meters; default S_PS
  std::optional<double> min_length;         // th_P, meters; default 50 S_PS
  double cell_factor = 2.0;                 // grid cell = cell_factor * S_PS
  int splat_neighbor = 8;                   // splat radius from this in-region neighbour
  double max_splat_cells = 4.0;

  void validate() const;
};

/// Thresholds after substituting S_PS.
struct ResolvedLineParams {
  double outlier_threshold;
  double min_length;
  double cell;
};
ResolvedLineParams resolve(const LineDetectParams& params, double point_scale);

/// Boundary segments of one planar region: members are projected into the plane,
/// splatted onto an occupancy grid, contour-traced, split-and-merged, refit by
/// least squares and lifted back onto the plane.
std::vector<LineSegment3D> detect_lines_in_plane(std::span<const Vec3> points, const PlanarRegion& region,
                                                 const LineDetectParams& params, double point_scale);

/// 2-D split-and-merge over an ordered polyline; returns [first, last] index pairs.
std::vector<std::pair<std::size_t, std::size_t>> split_and_merge(std::span<const Vec2> chain, double tolerance,
                                                                 bool closed);

}  // namespace truckloc
