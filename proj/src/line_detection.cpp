#include "truckloc/line_detection.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <opencv2/imgproc.hpp>

#include "truckloc/error.hpp"
#include "truckloc/kdtree.hpp"

namespace truckloc {
namespace {

struct Line2 {
  Vec2 point;
  Vec2 dir;
};

Line2 fit_line(std::span<const Vec2> pts) {
  Vec2 mean = Vec2::Zero();
  for (const auto& p : pts) mean += p;
  mean /= static_cast<double>(pts.size());
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (const auto& p : pts) cov += (p - mean) * (p - mean).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
  return {mean, eig.eigenvectors().col(1)};
}

double max_deviation(std::span<const Vec2> pts, const Line2& line) {
  const Vec2 nrm(-line.dir.y(), line.dir.x());
  double worst = 0.0;
  for (const auto& p : pts) worst = std::max(worst, std::abs((p - line.point).dot(nrm)));
  return worst;
}

// Chord-based recursive split of chain[first..last].
void split(std::span<const Vec2> chain, std::size_t first, std::size_t last, double tol,
           std::vector<std::pair<std::size_t, std::size_t>>& out) {
  const Vec2 a = chain[first], b = chain[last];
  const Vec2 ab = b - a;
  const double len = ab.norm();
  double worst = -1.0;
  std::size_t at = first;
  for (std::size_t i = first + 1; i < last; ++i) {
    const Vec2 ap = chain[i] - a;
    const double d = len > 0.0 ? std::abs(ab.x() * ap.y() - ab.y() * ap.x()) / len : ap.norm();
    if (d > worst) {
      worst = d;
      at = i;
    }
  }
  if (worst > tol && at > first && at < last) {
    split(chain, first, at, tol, out);
    split(chain, at, last, tol, out);
  } else {
    out.emplace_back(first, last);
  }
}

}  // namespace

void LineDetectParams::validate() const {
  if (outlier_threshold && !(*outlier_threshold > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "th_O must be positive");
  }
  if (min_length && !(*min_length > 0.0)) throw Error(ErrorCode::kInvalidArgument, "th_P must be positive");
  if (!(cell_factor > 0.0) || splat_neighbor < 1 || !(max_splat_cells > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "invalid occupancy grid parameters");
  }
}

ResolvedLineParams resolve(const LineDetectParams& params, double point_scale) {
  params.validate();
  if (!(point_scale > 0.0)) throw Error(ErrorCode::kInvalidArgument, "point scale must be positive");
  return {params.outlier_threshold.value_or(point_scale), params.min_length.value_or(50.0 * point_scale),
          params.cell_factor * point_scale};
}

std::vector<std::pair<std::size_t, std::size_t>> split_and_merge(std::span<const Vec2> chain, double tolerance,
                                                                 bool closed) {
  std::vector<std::pair<std::size_t, std::size_t>> pieces;
  if (chain.size() < 2) return pieces;
  if (closed) {
    // Break the loop at the point farthest from chain[0].
    std::size_t far = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < chain.size(); ++i) {
      const double d = (chain[i] - chain[0]).squaredNorm();
      if (d > best) {
        best = d;
        far = i;
      }
    }
    if (far == 0) return pieces;
    split(chain, 0, far, tolerance, pieces);
    // Second half wraps back to the start; index chain.size() stands for 0.
    std::vector<Vec2> tail(chain.begin() + static_cast<std::ptrdiff_t>(far), chain.end());
    tail.push_back(chain[0]);
    std::vector<std::pair<std::size_t, std::size_t>> tail_pieces;
    split(tail, 0, tail.size() - 1, tolerance, tail_pieces);
    for (auto [a, b] : tail_pieces) pieces.emplace_back(a + far, b + far);
  } else {
    split(chain, 0, chain.size() - 1, tolerance, pieces);
  }

  const std::size_t n = chain.size();
  const auto collect = [&](std::size_t a, std::size_t b) {
    std::vector<Vec2> pts;
    for (std::size_t i = a; i <= b; ++i) pts.push_back(chain[i % n]);
    return pts;
  };
  // Merge neighbours whose union still fits a line within tolerance. Indices of a
  // piece that wraps past the loop start exceed n and are read modulo n.
  bool merged = true;
  while (merged && pieces.size() > 1) {
    merged = false;
    const std::size_t count = pieces.size();
    const std::size_t limit = closed ? count : count - 1;
    for (std::size_t i = 0; i < limit; ++i) {
      const std::size_t j = (i + 1) % count;
      auto [a, b] = pieces[i];
      auto [c, d] = pieces[j];
      if (j == 0) {
        c += n;
        d += n;
      }
      if (d - a + 1 > n) continue;
      const auto pts = collect(a, d);
      if (pts.size() >= 2 && max_deviation(pts, fit_line(pts)) <= tolerance) {
        pieces[i] = {a, d};
        pieces.erase(pieces.begin() + static_cast<std::ptrdiff_t>(j));
        merged = true;
        break;
      }
    }
  }
  return pieces;
}

std::vector<LineSegment3D> detect_lines_in_plane(std::span<const Vec3> points, const PlanarRegion& region,
                                                 const LineDetectParams& params, double point_scale) {
  const ResolvedLineParams rp = resolve(params, point_scale);
  std::vector<LineSegment3D> out;
  if (region.members.size() < 3) return out;

  std::vector<Vec2> flat;
  flat.reserve(region.members.size());
  for (auto i : region.members) flat.push_back(region.to_plane(points[i]));

  // Splat radius from the local in-region density.
  const int kk = std::min<int>(params.splat_neighbor + 1, static_cast<int>(flat.size()));
  std::vector<Vec3> lifted;
  lifted.reserve(flat.size());
  for (const auto& p : flat) lifted.emplace_back(p.x(), p.y(), 0.0);
  const NeighborTable table = knn_table(lifted, kk);
  const double cap = params.max_splat_cells * rp.cell;
  std::vector<double> radius(flat.size());
  for (std::size_t i = 0; i < flat.size(); ++i) {
    const double d = std::sqrt(static_cast<double>(table.dist_row(i)[static_cast<std::size_t>(kk - 1)]));
    radius[i] = std::clamp(0.5 * d, 0.5 * rp.cell, cap);
  }

  Vec2 lo = flat[0], hi = flat[0];
  for (const auto& p : flat) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  double cell = rp.cell;
  const double pad = cap + 2.0 * cell;
  lo -= Vec2::Constant(pad);
  hi += Vec2::Constant(pad);
  // Keep pathological inputs from allocating huge grids.
  while ((hi - lo).x() / cell * (hi - lo).y() / cell > 4.0e7) cell *= 2.0;
  const int cols = static_cast<int>(std::ceil((hi - lo).x() / cell)) + 1;
  const int rows = static_cast<int>(std::ceil((hi - lo).y() / cell)) + 1;

  cv::Mat grid = cv::Mat::zeros(rows, cols, CV_8UC1);
  for (std::size_t i = 0; i < flat.size(); ++i) {
    const Vec2 g = (flat[i] - lo) / cell;
    const double rc = radius[i] / cell;
    const int c0 = static_cast<int>(std::floor(g.x() - rc)), c1 = static_cast<int>(std::ceil(g.x() + rc));
    const int r0 = static_cast<int>(std::floor(g.y() - rc)), r1 = static_cast<int>(std::ceil(g.y() + rc));
    for (int r = std::max(r0, 0); r <= std::min(r1, rows - 1); ++r) {
      for (int c = std::max(c0, 0); c <= std::min(c1, cols - 1); ++c) {
        const double dx = c + 0.5 - g.x(), dy = r + 0.5 - g.y();
        if (dx * dx + dy * dy <= rc * rc) grid.at<unsigned char>(r, c) = 255;
      }
    }
  }

  std::vector<std::vector<cv::Point>> contours;
  cv::findContours(grid, contours, cv::RETR_LIST, cv::CHAIN_APPROX_NONE);

  const double tol = rp.outlier_threshold + 1.5 * cell;
  for (const auto& contour : contours) {
    if (contour.size() < 4) continue;
    std::vector<Vec2> chain;
    chain.reserve(contour.size());
    for (const auto& p : contour) chain.push_back(lo + cell * Vec2(p.x + 0.5, p.y + 0.5));
    const std::size_t n = chain.size();
    for (auto [a, b] : split_and_merge(chain, tol, true)) {
      std::vector<Vec2> pts;
      for (std::size_t i = a; i <= b; ++i) pts.push_back(chain[i % n]);
      if (pts.size() < 2) continue;
      const Line2 line = fit_line(pts);
      const double t0 = (pts.front() - line.point).dot(line.dir);
      const double t1 = (pts.back() - line.point).dot(line.dir);
      if (std::abs(t1 - t0) < rp.min_length) continue;
      const Vec2 e0 = line.point + t0 * line.dir, e1 = line.point + t1 * line.dir;
      out.emplace_back(region.from_plane(e0), region.from_plane(e1));
    }
  }
  return out;
}

}  // namespace truckloc
