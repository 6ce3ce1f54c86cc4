#pragma once

#include <array>
#include <string>
#include <vector>

#include "truckloc/geometry.hpp"

namespace truckloc {

struct FusionParams {
  double latitude_bin = deg2rad(6.0);
  double relative_offset_max = 0.1;
  double perp_factor = 4.0;  // multiplies s_k

  void validate() const;
};

/// Latitude bin of a segment: asin(z) of its direction flipped to z >= 0.
int latitude_bin(const LineSegment3D& s, double bin_size);

/// Merges segments of one plane, longest first, until no pair qualifies. The
/// merged segment spans the two farthest of the four endpoints. Output is sorted
/// by length (desc), then lexicographic endpoints.
std::vector<LineSegment3D> fuse_lines_in_plane(std::vector<LineSegment3D> segments, const FusionParams& params,
                                               double scale, double d_mag);

struct ClusterParams {
  double th_a = 0.03;           // accept when 1 - |cos| <= th_a
  double th_b = 3.6;            // meters
  double min_separation = 0.25;  // near-duplicate suppression, meters

  void validate() const;
};

struct EdgeCluster {
  std::vector<LineSegment3D> edges;       // l_max, l2, l3, l4
  std::vector<LineSegment3D> candidates;  // all qualifying before suppression
};

/// Reference edge, three partners, grouping {l_max, l2}, {l3, l4} with l3 facing l_max.
EdgeCluster cluster_edges(std::vector<LineSegment3D> segments, const ClusterParams& params);

struct CompartmentResult {
  std::array<Vec3, 8> key_points;   // bottom face CCW from the corner nearest the origin, then top
  std::vector<LineSegment3D> edges;  // completed l_max, l2, l3, l4
  Vec3 dims = Vec3::Zero();         // l, w, h
  std::array<double, 4> extension{};  // growth applied to each edge, meters
  std::size_t input_segments = 0;
  std::size_t fused_segments = 0;
  std::size_t candidates = 0;
};

/// Extends each clustered edge to cover the projections of its partners' endpoints
/// and emits the eight hexahedron vertices with their dimensions. Throws
/// Error(kDegenerateGeometry) when the result is not a valid hexahedron.
CompartmentResult complete_contour(const std::vector<LineSegment3D>& edges);

/// Vertices in canonical order given two bottom and two top edges of equal extent.
std::array<Vec3, 8> canonical_keypoints(const std::vector<LineSegment3D>& edges);

/// Opposite faces within max_angle and all edges longer than min_edge.
bool is_valid_hexahedron(const std::array<Vec3, 8>& p, double max_angle = deg2rad(10.0), double min_edge = 1e-6,
                         std::string* why = nullptr);

struct PlaneSegments {
  std::vector<LineSegment3D> segments;
  double scale = 0.05;  // s_k
};

struct KeypointConfig {
  FusionParams fusion;
  ClusterParams cluster;
};

/// fuse (per plane) -> cluster -> complete.
CompartmentResult locate_keypoints(const std::vector<PlaneSegments>& planes, double d_mag, const KeypointConfig& cfg);

/// Convenience form treating all segments as one plane group.
CompartmentResult locate_keypoints(const std::vector<LineSegment3D>& segments, const KeypointConfig& cfg,
                                   double scale = 0.05);

}  // namespace truckloc
