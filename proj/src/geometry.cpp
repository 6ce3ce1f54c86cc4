#include "truckloc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "truckloc/error.hpp"

namespace truckloc {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kDegenerate: return "degenerate";
    case ErrorCode::kNotConverged: return "not_converged";
    case ErrorCode::kReflectorNotFound: return "reflector_not_found";
    case ErrorCode::kWorldFrameInvalid: return "world_frame_invalid";
    case ErrorCode::kEmptyCrop: return "empty_crop";
    case ErrorCode::kInsufficientEdges: return "insufficient_edges";
    case ErrorCode::kDegenerateGeometry: return "degenerate_geometry";
  }
  return "unknown";
}

Mat3 rotation_x(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r << 1, 0, 0,
       0, c, -s,
       0, s, c;
  return r;
}

Mat3 rotation_y(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r << c, 0, s,
       0, 1, 0,
       -s, 0, c;
  return r;
}

Mat3 rotation_z(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r << c, -s, 0,
       s, c, 0,
       0, 0, 1;
  return r;
}

Mat3 euler_to_rotation(const EulerAngles& w) {
  return rotation_z(w.yaw) * rotation_y(w.pitch) * rotation_x(w.roll);
}

Mat3 platform_rotation(double phi) { return rotation_y(phi); }

bool is_rotation(const Mat3& r, double tol) {
  if (!r.allFinite()) return false;
  const Mat3 gram = r.transpose() * r - Mat3::Identity();
  return gram.cwiseAbs().maxCoeff() <= tol && r.determinant() > 0.0;
}

RigidTransform::RigidTransform() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}

RigidTransform::RigidTransform(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {
  if (!is_rotation(rotation_)) {
    std::ostringstream os;
    os << "rotation is not orthonormal with det +1 (det = " << rotation_.determinant() << ")";
    throw Error(ErrorCode::kInvalidArgument, os.str());
  }
  if (!translation_.allFinite()) throw Error(ErrorCode::kInvalidArgument, "non-finite translation");
}

RigidTransform RigidTransform::from_matrix(const Mat4& m) {
  if ((m.row(3) - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() > 1e-12) {
    throw Error(ErrorCode::kInvalidArgument, "homogeneous matrix must end with [0 0 0 1]");
  }
  return {m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>()};
}

RigidTransform RigidTransform::from_translation(const Vec3& t) { return {Mat3::Identity(), t}; }

RigidTransform RigidTransform::operator*(const RigidTransform& rhs) const {
  return {rotation_ * rhs.rotation_, rotation_ * rhs.translation_ + translation_};
}

RigidTransform RigidTransform::inverse() const {
  const Mat3 rt = rotation_.transpose();
  return {rt, -(rt * translation_)};
}

Mat4 RigidTransform::matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rotation_;
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

Plane Plane::from_point_normal(const Vec3& point, const Vec3& normal) {
  const double n = normal.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw Error(ErrorCode::kInvalidArgument, "plane normal must be non-zero");
  Plane plane;
  plane.normal = normal / n;
  plane.offset = plane.normal.dot(point);
  return plane;
}

LineSegment3D::LineSegment3D(const Vec3& start, const Vec3& end) : start_(start), end_(end) {
  if (!start_.allFinite() || !end_.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "segment endpoints must be finite");
  }
  if ((end_ - start_).squaredNorm() == 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "segment endpoints coincide");
  }
}

LineProjection project_point_onto_line(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) throw Error(ErrorCode::kInvalidArgument, "cannot project onto a degenerate segment");
  const double param = (p - a).dot(ab) / len2;
  return {a + param * ab, param};
}

double distance_to_line(const Vec3& p, const LineSegment3D& s) {
  return (p - project_point_onto_line(p, s).foot).norm();
}

// Closest points between two closed segments (Ericson, Real-Time Collision Detection 5.1.9).
double segment_distance(const LineSegment3D& s1, const LineSegment3D& s2) {
  const Vec3 d1 = s1.vector();
  const Vec3 d2 = s2.vector();
  const Vec3 r = s1.start() - s2.start();
  const double a = d1.squaredNorm();
  const double e = d2.squaredNorm();
  const double f = d2.dot(r);
  const double c = d1.dot(r);
  const double b = d1.dot(d2);
  const double denom = a * e - b * b;

  double s = 0.0;
  if (denom > 1e-14 * a * e) s = std::clamp((b * f - c * e) / denom, 0.0, 1.0);
  double t = (b * s + f) / e;
  if (t < 0.0) {
    t = 0.0;
    s = std::clamp(-c / a, 0.0, 1.0);
  } else if (t > 1.0) {
    t = 1.0;
    s = std::clamp((b - c) / a, 0.0, 1.0);
  }
  return ((s1.start() + s * d1) - (s2.start() + t * d2)).norm();
}

std::pair<Vec3, Vec3> orthonormal_basis(const Vec3& n) {
  const Vec3 unit = n.normalized();
  const Vec3 helper = std::abs(unit.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 u = unit.cross(helper).normalized();
  const Vec3 v = unit.cross(u);
  return {u, v};
}

}  // namespace truckloc
