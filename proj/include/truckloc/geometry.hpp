#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace truckloc {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

inline constexpr double kPi = 3.14159265358979323846;

constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Roll / pitch / yaw (w_x, w_y, w_z) in radians.
struct EulerAngles {
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;
};

Mat3 rotation_x(double angle);
Mat3 rotation_y(double angle);
Mat3 rotation_z(double angle);

/// R_z(yaw) * R_y(pitch) * R_x(roll).
Mat3 euler_to_rotation(const EulerAngles& w);

/// Encoder rotation of the platform about its y axis.
Mat3 platform_rotation(double phi);

/// Gram-matrix check: |R^T R - I| <= tol entrywise and det(R) > 0.
bool is_rotation(const Mat3& r, double tol = 1e-9);

/// Rotation + translation. Constructed values always hold a proper rotation.
class RigidTransform {
 public:
  RigidTransform();
  RigidTransform(const Mat3& rotation, const Vec3& translation);

  static RigidTransform identity() { return {}; }
  static RigidTransform from_matrix(const Mat4& m);
  static RigidTransform from_translation(const Vec3& t);

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  Vec3 apply(const Vec3& p) const { return rotation_ * p + translation_; }
  Vec3 operator*(const Vec3& p) const { return apply(p); }
  RigidTransform operator*(const RigidTransform& rhs) const;

  RigidTransform inverse() const;
  Mat4 matrix() const;

 private:
  Mat3 rotation_;
  Vec3 translation_;
};

/// a * b: applies b first, then a.
inline RigidTransform compose(const RigidTransform& a, const RigidTransform& b) { return a * b; }
inline RigidTransform invert(const RigidTransform& t) { return t.inverse(); }

/// Points p with normal.dot(p) == offset.
struct Plane {
  Vec3 normal = Vec3::UnitZ();
  double offset = 0.0;

  static Plane from_point_normal(const Vec3& point, const Vec3& normal);

  double signed_distance(const Vec3& p) const { return normal.dot(p) - offset; }
  Vec3 project(const Vec3& p) const { return p - signed_distance(p) * normal; }
};

class LineSegment3D {
 public:
  LineSegment3D(const Vec3& start, const Vec3& end);

  const Vec3& start() const { return start_; }
  const Vec3& end() const { return end_; }
  Vec3 vector() const { return end_ - start_; }
  Vec3 direction() const { return vector().normalized(); }
  double length() const { return vector().norm(); }
  Vec3 midpoint() const { return 0.5 * (start_ + end_); }

  LineSegment3D reversed() const { return {end_, start_}; }
  LineSegment3D transformed(const RigidTransform& t) const { return {t * start_, t * end_}; }

 private:
  Vec3 start_;
  Vec3 end_;
};

struct LineProjection {
  Vec3 foot;
  double param;  // foot = a + param * (b - a)
};

LineProjection project_point_onto_line(const Vec3& p, const Vec3& a, const Vec3& b);
inline LineProjection project_point_onto_line(const Vec3& p, const LineSegment3D& s) {
  return project_point_onto_line(p, s.start(), s.end());
}

/// Perpendicular distance from p to the infinite line through s.
double distance_to_line(const Vec3& p, const LineSegment3D& s);

/// Minimum distance between two segments (closed).
double segment_distance(const LineSegment3D& a, const LineSegment3D& b);

/// Orthonormal (u, v) spanning the plane orthogonal to n.
std::pair<Vec3, Vec3> orthonormal_basis(const Vec3& n);

}  // namespace truckloc
