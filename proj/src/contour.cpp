#include "truckloc/contour.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "truckloc/error.hpp"

namespace truckloc {
namespace {

bool lex_less(const Vec3& a, const Vec3& b) {
  if (a.x() != b.x()) return a.x() < b.x();
  if (a.y() != b.y()) return a.y() < b.y();
  return a.z() < b.z();
}

LineSegment3D canonical(const LineSegment3D& s) { return lex_less(s.end(), s.start()) ? s.reversed() : s; }

bool segment_order(const LineSegment3D& a, const LineSegment3D& b) {
  const double la = a.length(), lb = b.length();
  if (la != lb) return la > lb;
  if (a.start() != b.start()) return lex_less(a.start(), b.start());
  return lex_less(a.end(), b.end());
}

void sort_segments(std::vector<LineSegment3D>& segs) {
  for (auto& s : segs) s = canonical(s);
  std::sort(segs.begin(), segs.end(), segment_order);
}

LineSegment3D farthest_pair(const LineSegment3D& a, const LineSegment3D& b) {
  const std::array<Vec3, 4> p{a.start(), a.end(), b.start(), b.end()};
  std::size_t bi = 0, bj = 1;
  double best = -1.0;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = i + 1; j < 4; ++j) {
      const double d = (p[i] - p[j]).squaredNorm();
      if (d > best) {
        best = d;
        bi = i;
        bj = j;
      }
    }
  }
  return canonical(LineSegment3D(p[bi], p[bj]));
}

double origin_distance(const LineSegment3D& s) { return std::min(s.start().norm(), s.end().norm()); }

std::string describe(const std::vector<LineSegment3D>& segs) {
  std::ostringstream out;
  out.precision(3);
  for (std::size_t i = 0; i < segs.size(); ++i) {
    out << (i ? "; " : "") << "[" << segs[i].start().transpose() << " -> " << segs[i].end().transpose()
        << ", len " << segs[i].length() << "]";
  }
  return out.str();
}

Vec3 newell_normal(const std::array<Vec3, 8>& p, const std::array<int, 4>& f) {
  Vec3 n = Vec3::Zero();
  for (int i = 0; i < 4; ++i) {
    const Vec3& a = p[static_cast<std::size_t>(f[static_cast<std::size_t>(i)])];
    const Vec3& b = p[static_cast<std::size_t>(f[static_cast<std::size_t>((i + 1) % 4)])];
    n += a.cross(b);
  }
  return n;
}

}  // namespace

void FusionParams::validate() const {
  if (!(latitude_bin > 0.0 && relative_offset_max > 0.0 && perp_factor > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "fusion parameters must be positive");
  }
}

void ClusterParams::validate() const {
  if (!(th_a >= 0.0 && th_a <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "Th_a must lie in [0,1]");
  if (!(th_b > 0.0)) throw Error(ErrorCode::kInvalidArgument, "Th_b must be positive");
  if (!(min_separation >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "min_separation must be >= 0");
}

int latitude_bin(const LineSegment3D& s, double bin_size) {
  Vec3 d = s.direction();
  if (d.z() < 0.0) d = -d;
  const double lat = std::asin(std::clamp(d.z(), 0.0, 1.0));
  return static_cast<int>(std::floor(lat / bin_size));
}

std::vector<LineSegment3D> fuse_lines_in_plane(std::vector<LineSegment3D> segs, const FusionParams& params,
                                               double scale, double d_mag) {
  params.validate();
  if (!(scale > 0.0)) throw Error(ErrorCode::kInvalidArgument, "plane scale must be positive");
  if (!(d_mag > 0.0)) throw Error(ErrorCode::kInvalidArgument, "d_mag must be positive");
  const double perp = params.perp_factor * scale;

  bool changed = true;
  while (changed) {
    changed = false;
    sort_segments(segs);
    for (std::size_t i = 0; i < segs.size() && !changed; ++i) {
      const int bin_i = latitude_bin(segs[i], params.latitude_bin);
      const double d_i = origin_distance(segs[i]);
      for (std::size_t j = 0; j < segs.size(); ++j) {
        if (j == i) continue;
        if (latitude_bin(segs[j], params.latitude_bin) != bin_i) continue;
        if (std::abs(d_i - origin_distance(segs[j])) / d_mag >= params.relative_offset_max) continue;
        if (distance_to_line(segs[j].start(), segs[i]) >= perp) continue;
        if (distance_to_line(segs[j].end(), segs[i]) >= perp) continue;
        segs[i] = farthest_pair(segs[i], segs[j]);
        segs.erase(segs.begin() + static_cast<std::ptrdiff_t>(j));
        changed = true;
        break;
      }
    }
  }
  return segs;
}

EdgeCluster cluster_edges(std::vector<LineSegment3D> segs, const ClusterParams& params) {
  params.validate();
  sort_segments(segs);
  if (segs.size() < 4) {
    throw Error(ErrorCode::kInsufficientEdges, "[cluster] insufficient contour edges: " +
                                                   std::to_string(segs.size()) + " segments given, need 4");
  }
  const LineSegment3D& lmax = segs.front();
  const Vec3 dmax = lmax.direction();

  EdgeCluster out;
  std::vector<LineSegment3D> accepted;
  for (std::size_t k = 1; k < segs.size(); ++k) {
    const double c = std::abs(segs[k].direction().dot(dmax));
    if (1.0 - c > params.th_a) continue;
    if (segment_distance(segs[k], lmax) > params.th_b) continue;
    out.candidates.push_back(segs[k]);
    bool keep = segment_distance(segs[k], lmax) >= params.min_separation;
    for (const auto& a : accepted) keep = keep && segment_distance(segs[k], a) >= params.min_separation;
    if (keep) accepted.push_back(segs[k]);
  }
  if (accepted.size() < 3) {
    throw Error(ErrorCode::kInsufficientEdges,
                "[cluster] insufficient contour edges: " + std::to_string(accepted.size()) +
                    " candidates parallel to the reference edge (need 3): " + describe(accepted));
  }
  accepted.erase(accepted.begin() + 3, accepted.end());

  std::size_t near = 0;
  for (std::size_t k = 1; k < 3; ++k) {
    if (segment_distance(accepted[k], lmax) < segment_distance(accepted[near], lmax)) near = k;
  }
  const LineSegment3D l2 = accepted[near];
  std::vector<LineSegment3D> rest;
  for (std::size_t k = 0; k < 3; ++k) {
    if (k != near) rest.push_back(accepted[k]);
  }
  const auto offset = [](const LineSegment3D& from, const LineSegment3D& to) {
    const Vec3 m = to.midpoint();
    return Vec3(m - project_point_onto_line(m, from).foot);
  };
  const double s = offset(lmax, l2).dot(offset(rest[0], rest[1]));
  if (s <= 0.0) std::swap(rest[0], rest[1]);
  out.edges = {lmax, l2, rest[0], rest[1]};
  return out;
}

std::array<Vec3, 8> canonical_keypoints(const std::vector<LineSegment3D>& edges) {
  if (edges.size() != 4) throw Error(ErrorCode::kInvalidArgument, "need exactly 4 edges");
  std::array<std::size_t, 4> idx{0, 1, 2, 3};
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return edges[a].midpoint().z() < edges[b].midpoint().z();
  });
  const LineSegment3D& b0 = edges[idx[0]];
  const LineSegment3D& b1 = edges[idx[1]];
  const Vec3 axis = b0.direction();
  const auto ends = [&](const LineSegment3D& s) {
    return s.start().dot(axis) <= s.end().dot(axis) ? std::array<Vec3, 2>{s.start(), s.end()}
                                                    : std::array<Vec3, 2>{s.end(), s.start()};
  };

  // Partner top edge: the one nearest each bottom edge's line.
  const LineSegment3D* t_for_b0 = &edges[idx[2]];
  const LineSegment3D* t_for_b1 = &edges[idx[3]];
  if (distance_to_line(edges[idx[3]].midpoint(), b0) < distance_to_line(edges[idx[2]].midpoint(), b0)) {
    std::swap(t_for_b0, t_for_b1);
  }

  const auto e0 = ends(b0), e1 = ends(b1);
  const auto u0 = ends(*t_for_b0), u1 = ends(*t_for_b1);
  // Corners as (bottom, top) pairs around the face.
  std::array<std::pair<Vec3, Vec3>, 4> ring;
  const bool ccw = (e0[1] - e0[0]).cross(e1[0] - e0[0]).z() > 0.0;
  if (ccw) {
    ring = {{{e0[0], u0[0]}, {e0[1], u0[1]}, {e1[1], u1[1]}, {e1[0], u1[0]}}};
  } else {
    ring = {{{e0[0], u0[0]}, {e1[0], u1[0]}, {e1[1], u1[1]}, {e0[1], u0[1]}}};
  }
  std::size_t start = 0;
  for (std::size_t i = 1; i < 4; ++i) {
    if (ring[i].first.norm() < ring[start].first.norm()) start = i;
  }
  std::array<Vec3, 8> out;
  for (std::size_t i = 0; i < 4; ++i) {
    out[i] = ring[(start + i) % 4].first;
    out[4 + i] = ring[(start + i) % 4].second;
  }
  return out;
}

bool is_valid_hexahedron(const std::array<Vec3, 8>& p, double max_angle, double min_edge, std::string* why) {
  static constexpr std::array<std::array<int, 2>, 12> kEdges{
      {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6}, {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7}}};
  for (const auto& e : kEdges) {
    if (!((p[static_cast<std::size_t>(e[0])] - p[static_cast<std::size_t>(e[1])]).norm() > min_edge)) {
      if (why) *why = "zero-length edge " + std::to_string(e[0]) + "-" + std::to_string(e[1]);
      return false;
    }
  }
  static constexpr std::array<std::array<std::array<int, 4>, 2>, 3> kOpposite{{
      {{{0, 1, 2, 3}, {4, 5, 6, 7}}},
      {{{0, 1, 5, 4}, {3, 2, 6, 7}}},
      {{{1, 2, 6, 5}, {0, 3, 7, 4}}},
  }};
  for (const auto& pair : kOpposite) {
    const Vec3 a = newell_normal(p, pair[0]), b = newell_normal(p, pair[1]);
    if (a.norm() <= 0.0 || b.norm() <= 0.0) {
      if (why) *why = "degenerate face";
      return false;
    }
    const double c = std::clamp(std::abs(a.normalized().dot(b.normalized())), 0.0, 1.0);
    if (std::acos(c) >= max_angle) {
      if (why) *why = "opposite faces differ by " + std::to_string(rad2deg(std::acos(c))) + " deg";
      return false;
    }
  }
  return true;
}

CompartmentResult complete_contour(const std::vector<LineSegment3D>& edges) {
  if (edges.size() != 4) throw Error(ErrorCode::kInvalidArgument, "[complete] need exactly 4 edges");
  for (std::size_t a = 0; a < 4; ++a) {
    for (std::size_t b = a + 1; b < 4; ++b) {
      if (distance_to_line(edges[b].midpoint(), edges[a]) < 1e-6) {
        throw Error(ErrorCode::kDegenerateGeometry, "[complete] edges " + std::to_string(a) + " and " +
                                                        std::to_string(b) + " nearly intersect");
      }
    }
  }
  std::vector<Vec3> s, e;
  for (const auto& l : edges) {
    s.push_back(l.start());
    e.push_back(l.end());
  }
  // Grow each edge toward the projections of its partners' endpoints.
  for (int sweep = 0; sweep < 3; ++sweep) {
    for (std::size_t a = 0; a < 4; ++a) {
      for (std::size_t b = 0; b < 4; ++b) {
        if (a == b) continue;
        for (const Vec3& p : {s[a], e[a]}) {
          const LineProjection proj = project_point_onto_line(p, s[b], e[b]);
          if (proj.param < 0.0) s[b] = proj.foot;
          if (proj.param > 1.0) e[b] = proj.foot;
        }
      }
    }
  }
  CompartmentResult out;
  for (std::size_t a = 0; a < 4; ++a) {
    out.edges.emplace_back(s[a], e[a]);
    out.extension[a] = out.edges[a].length() - edges[a].length();
  }
  out.key_points = canonical_keypoints(out.edges);
  std::string why;
  if (!is_valid_hexahedron(out.key_points, deg2rad(10.0), 1e-6, &why)) {
    throw Error(ErrorCode::kDegenerateGeometry, "[complete] key points do not form a valid hexahedron: " + why);
  }
  const auto& p = out.key_points;
  const Vec3 axis = out.edges[0].direction();
  double len = 0.0, wid = 0.0, hgt = 0.0;
  int nl = 0, nw = 0;
  for (std::size_t face : {0u, 4u}) {
    for (std::size_t i = 0; i < 4; ++i) {
      const Vec3 d = p[face + (i + 1) % 4] - p[face + i];
      if (std::abs(d.normalized().dot(axis)) > std::sqrt(0.5)) {
        len += d.norm();
        ++nl;
      } else {
        wid += d.norm();
        ++nw;
      }
    }
  }
  for (std::size_t i = 0; i < 4; ++i) hgt += (p[4 + i] - p[i]).norm();
  out.dims = Vec3(nl ? len / nl : 0.0, nw ? wid / nw : 0.0, hgt / 4.0);
  return out;
}

CompartmentResult locate_keypoints(const std::vector<PlaneSegments>& planes, double d_mag,
                                   const KeypointConfig& cfg) {
  std::vector<LineSegment3D> all;
  std::size_t input = 0;
  for (const auto& plane : planes) {
    input += plane.segments.size();
    auto fused = fuse_lines_in_plane(plane.segments, cfg.fusion, plane.scale, d_mag);
    all.insert(all.end(), fused.begin(), fused.end());
  }
  if (input == 0) throw Error(ErrorCode::kInsufficientEdges, "[fuse] no line segments detected");
  const EdgeCluster cluster = cluster_edges(all, cfg.cluster);
  CompartmentResult out = complete_contour(cluster.edges);
  out.input_segments = input;
  out.fused_segments = all.size();
  out.candidates = cluster.candidates.size();
  return out;
}

CompartmentResult locate_keypoints(const std::vector<LineSegment3D>& segments, const KeypointConfig& cfg,
                                   double scale) {
  double d_mag = 1.0;
  if (!segments.empty()) d_mag = std::max(segments.front().start().norm(), 1e-9);
  return locate_keypoints(std::vector<PlaneSegments>{{segments, scale}}, d_mag, cfg);
}

}  // namespace truckloc
