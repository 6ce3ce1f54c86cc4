#include "truckloc/world_frame.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "truckloc/error.hpp"
#include "truckloc/plane_fit.hpp"

namespace truckloc {
namespace {

double cross2(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

// Monotone chain; returns hull vertices counter-clockwise.
std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  if (pts.size() < 3) return pts;
  std::vector<Vec2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross2(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross2(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

// Algebraic fit followed by Gauss-Newton on the geometric distance.
std::pair<Vec2, double> fit_circle(const std::vector<Vec2>& pts) {
  Eigen::MatrixXd a(static_cast<Eigen::Index>(pts.size()), 3);
  Eigen::VectorXd b(static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    a(r, 0) = 2.0 * pts[i].x();
    a(r, 1) = 2.0 * pts[i].y();
    a(r, 2) = 1.0;
    b[r] = pts[i].squaredNorm();
  }
  const Eigen::Vector3d sol = a.colPivHouseholderQr().solve(b);
  Vec2 c(sol[0], sol[1]);
  double radius = std::sqrt(std::max(sol[2] + c.squaredNorm(), 0.0));
  for (int iter = 0; iter < 20; ++iter) {
    Eigen::MatrixXd j(static_cast<Eigen::Index>(pts.size()), 3);
    Eigen::VectorXd res(static_cast<Eigen::Index>(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      const Vec2 d = pts[i] - c;
      const double len = std::max(d.norm(), 1e-12);
      res[r] = len - radius;
      j(r, 0) = -d.x() / len;
      j(r, 1) = -d.y() / len;
      j(r, 2) = -1.0;
    }
    const Eigen::Vector3d step = (j.transpose() * j).ldlt().solve(-j.transpose() * res);
    if (!step.allFinite()) break;
    c += step.head<2>();
    radius += step[2];
    if (step.norm() < 1e-12) break;
  }
  return {c, radius};
}

}  // namespace

void AxisBox::validate() const {
  if (!min.allFinite() || !max.allFinite() || !((max - min).array() > 0.0).all()) {
    throw Error(ErrorCode::kInvalidArgument, "axis box must have positive extent on every axis");
  }
}

void ReflectorSpec::validate() const {
  seed_region.validate();
  if (!(intensity_threshold > 0.0 && intensity_threshold < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "reflector " + name + ": intensity threshold must lie in (0,1)");
  }
  if (!(expected_radius > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "reflector " + name + ": expected radius must be positive");
  }
}

ReflectorFit locate_reflector(const PointCloud& cloud, const ReflectorSpec& spec, std::size_t min_points) {
  spec.validate();
  std::vector<Vec3> pts, background;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (!spec.seed_region.contains(cloud.points[i])) continue;
    if (cloud.intensity[i] >= spec.intensity_threshold) {
      pts.push_back(cloud.points[i]);
    } else {
      background.push_back(cloud.points[i]);
    }
  }
  if (pts.size() < min_points) {
    throw Error(ErrorCode::kReflectorNotFound, "reflector " + spec.name + ": " + std::to_string(pts.size()) +
                                                   " high-intensity points in seed region (need " +
                                                   std::to_string(min_points) + ")");
  }
  const PlaneFit fit = fit_plane_ransac(pts, 0.01, 200, 7);
  const auto [u, v] = orthonormal_basis(fit.plane.normal);
  // Slide samples along their ray (from the platform origin) onto the board plane;
  // this removes range noise and the small height step to the surrounding floor.
  const auto to2d = [&](const Vec3& p) {
    const double along = fit.plane.normal.dot(p);
    const Vec3 q = std::abs(along) > 1e-9 ? Vec3(p * (fit.plane.offset / along)) : fit.plane.project(p);
    return Vec2(q.dot(u), q.dot(v));
  };

  std::vector<Vec2> board;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (fit.inliers[i]) board.push_back(to2d(pts[i]));
  }
  std::vector<Vec2> around;
  for (const auto& p : background) {
    if (std::abs(fit.plane.signed_distance(p)) < 0.03) around.push_back(to2d(p));
  }

  // Median nearest-neighbour spacing on the board.
  std::vector<double> nn(board.size(), std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < board.size(); ++i) {
    for (std::size_t j = 0; j < board.size(); ++j) {
      if (i != j) nn[i] = std::min(nn[i], (board[i] - board[j]).norm());
    }
  }
  std::nth_element(nn.begin(), nn.begin() + static_cast<std::ptrdiff_t>(nn.size() / 2), nn.end());
  const double reach = 3.0 * nn[nn.size() / 2];

  // The rim lies, on average, halfway between a board sample and an adjacent
  // background sample; fit the circle to those midpoints.
  std::vector<Vec2> rim;
  const auto pair_up = [&](const std::vector<Vec2>& from, const std::vector<Vec2>& to) {
    for (const auto& a : from) {
      for (const auto& b : to) {
        if ((a - b).norm() < reach) rim.push_back(0.5 * (a + b));
      }
    }
  };
  pair_up(board, around);

  ReflectorFit out;
  out.plane = fit.plane;
  out.support = board.size();
  const Vec3 origin = fit.plane.normal * fit.plane.offset;
  std::vector<Vec2> edge = rim.size() >= 8 ? rim : convex_hull(board);
  if (edge.size() >= 5) {
    const auto [c, r] = fit_circle(edge);
    out.center = origin + c.x() * u + c.y() * v;
    out.radius = r;
  } else {
    Vec2 c = Vec2::Zero();
    for (const auto& p : board) c += p;
    c /= static_cast<double>(board.size());
    out.center = origin + c.x() * u + c.y() * v;
  }
  out.radius_warning = std::abs(out.radius - spec.expected_radius) > 0.5 * spec.expected_radius;
  return out;
}

void CropBounds::validate() const {
  if (!(z_min < z_max)) throw Error(ErrorCode::kInvalidArgument, "crop bounds need z_min < z_max");
}

ParkingArea ParkingArea::from_corners(const std::array<Vec3, 4>& corners) {
  ParkingArea area;
  area.corners = corners;
  for (const auto& c : corners) {
    if (!c.allFinite()) throw Error(ErrorCode::kWorldFrameInvalid, "non-finite corner");
  }
  const Plane plane = fit_plane_least_squares(std::span<const Vec3>(corners.data(), corners.size()));
  for (const auto& c : corners) area.coplanarity = std::max(area.coplanarity, std::abs(plane.signed_distance(c)));

  const double s12 = (corners[1] - corners[0]).norm(), s43 = (corners[2] - corners[3]).norm();
  const double s14 = (corners[3] - corners[0]).norm(), s23 = (corners[2] - corners[1]).norm();
  area.rectangularity = std::max(std::abs(s12 - s43) / std::max(s12, s43), std::abs(s14 - s23) / std::max(s14, s23));
  area.x_max = s12;
  area.y_max = s14;

  std::ostringstream msg;
  if (area.coplanarity > kMaxCoplanarity) {
    msg << "corners not coplanar: max deviation " << area.coplanarity << " m (limit " << kMaxCoplanarity << ")";
    throw Error(ErrorCode::kWorldFrameInvalid, msg.str());
  }
  if (area.rectangularity > kMaxSideMismatch) {
    msg << "corners not rectangular: opposite sides differ by " << 100.0 * area.rectangularity << "% (limit "
        << 100.0 * kMaxSideMismatch << "%)";
    throw Error(ErrorCode::kWorldFrameInvalid, msg.str());
  }
  return area;
}

RigidTransform build_world_frame(const std::array<Vec3, 4>& corners) {
  (void)ParkingArea::from_corners(corners);
  const Vec3& p1 = corners[0];
  const Plane plane = fit_plane_least_squares(std::span<const Vec3>(corners.data(), corners.size()));
  Vec3 z = plane.normal;
  // The sensor sits at the platform origin, above the area.
  if (z.dot(-p1) < 0.0) z = -z;
  Vec3 x = corners[1] - p1;
  x = (x - x.dot(z) * z).normalized();
  const Vec3 y = z.cross(x);
  if ((corners[3] - p1).dot(y) <= 0.0) {
    throw Error(ErrorCode::kWorldFrameInvalid,
                "corners are ordered clockwise seen from the sensor; expected P1, P2 along the length, P4 along the "
                "width");
  }
  Mat3 r;
  r.col(0) = x;
  r.col(1) = y;
  r.col(2) = z;
  // ^O_A T has columns (x, y, z) and origin P1; invert to get ^A_O T.
  return RigidTransform(r, p1).inverse();
}

namespace {

bool inside(const Vec3& a, const ParkingArea& area, const CropBounds& b) {
  return a.x() >= 0.0 && a.x() <= area.x_max && a.y() >= 0.0 && a.y() <= area.y_max && a.z() >= b.z_min &&
         a.z() <= b.z_max;
}

}  // namespace

PointCloud crop_to_parking(const PointCloud& cloud, const RigidTransform& a_from_o, const ParkingArea& area,
                           const CropBounds& bounds) {
  bounds.validate();
  const auto n = static_cast<std::ptrdiff_t>(cloud.size());
  std::vector<Vec3> moved(cloud.size());
  std::vector<unsigned char> keep(cloud.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    moved[k] = a_from_o * cloud.points[k];
    keep[k] = inside(moved[k], area, bounds) ? 1 : 0;
  }
  PointCloud out;
  for (std::size_t k = 0; k < cloud.size(); ++k) {
    if (keep[k]) out.push_back(moved[k], cloud.intensity[k]);
  }
  return out;
}

WorldFrame setup_parking(const PointCloud& cloud, const ParkingSetupConfig& config, std::array<ReflectorFit, 4>* fits) {
  config.crop.validate();
  std::array<Vec3, 4> centers;
  for (std::size_t i = 0; i < 4; ++i) {
    const ReflectorFit f = locate_reflector(cloud, config.reflectors[i]);
    centers[i] = f.center;
    if (fits) (*fits)[i] = f;
  }
  WorldFrame wf;
  wf.area = ParkingArea::from_corners(centers);
  wf.a_from_o = build_world_frame(centers);
  wf.crop = config.crop;
  return wf;
}

}  // namespace truckloc
