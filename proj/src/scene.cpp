#include "truckloc/scene.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "truckloc/error.hpp"

namespace truckloc {

namespace {

// splitmix64 as a UniformRandomBitGenerator; one instance per ray.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;
  explicit SplitMix64(std::uint64_t state) : state_(state) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

Mat3 frame_from_normal(const Vec3& normal) {
  const Vec3 z = normal.normalized();
  const auto [u, v] = orthonormal_basis(z);
  Mat3 r;
  r.col(0) = u;
  r.col(1) = v;
  r.col(2) = z;
  return r;
}

}  // namespace

Primitive Primitive::box(int id, const Vec3& center, const Vec3& size, double yaw, float intensity,
                         std::string label) {
  Primitive p;
  p.kind = PrimitiveKind::kBox;
  p.id = id;
  p.label = std::move(label);
  p.pose = RigidTransform(rotation_z(yaw), center);
  p.half_extents = 0.5 * size;
  p.intensity = intensity;
  return p;
}

Primitive Primitive::rectangle(int id, const RigidTransform& pose, double size_x, double size_y, float intensity,
                               std::string label) {
  Primitive p;
  p.kind = PrimitiveKind::kRectangle;
  p.id = id;
  p.label = std::move(label);
  p.pose = pose;
  p.half_extents = Vec3(0.5 * size_x, 0.5 * size_y, 0.0);
  p.intensity = intensity;
  return p;
}

Primitive Primitive::disc(int id, const Vec3& center, const Vec3& normal, double radius, float intensity,
                          std::string label) {
  Primitive p;
  p.kind = PrimitiveKind::kDisc;
  p.id = id;
  p.label = std::move(label);
  p.pose = RigidTransform(frame_from_normal(normal), center);
  p.half_extents = Vec3(radius, radius, 0.0);
  p.intensity = intensity;
  return p;
}

void Primitive::validate() const {
  if (!half_extents.allFinite() || half_extents.minCoeff() < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "primitive '" + label + "' has invalid dimensions");
  }
  if (kind == PrimitiveKind::kBox && half_extents.minCoeff() <= 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "box '" + label + "' has a zero dimension");
  }
  if (kind != PrimitiveKind::kBox && (half_extents.x() <= 0.0 || half_extents.y() <= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "flat primitive '" + label + "' has a zero dimension");
  }
  if (!(intensity >= 0.0f && intensity <= 1.0f)) {
    throw Error(ErrorCode::kInvalidArgument, "primitive '" + label + "' intensity outside [0, 1]");
  }
}

std::optional<RayHit> intersect(const Primitive& prim, const Vec3& origin, const Vec3& direction, double t_min,
                                double t_max) {
  const Mat3& r = prim.pose.rotation();
  const Vec3 o = r.transpose() * (origin - prim.pose.translation());
  const Vec3 d = r.transpose() * direction;
  const Vec3& h = prim.half_extents;

  if (prim.kind == PrimitiveKind::kBox) {
    double t0 = t_min, t1 = t_max;
    int face0 = -1, face1 = -1;
    for (int axis = 0; axis < 3; ++axis) {
      if (std::abs(d[axis]) < 1e-15) {
        if (o[axis] < -h[axis] || o[axis] > h[axis]) return std::nullopt;
        continue;
      }
      const double inv = 1.0 / d[axis];
      double ta = (-h[axis] - o[axis]) * inv;
      double tb = (h[axis] - o[axis]) * inv;
      int fa = 2 * axis, fb = 2 * axis + 1;
      if (ta > tb) {
        std::swap(ta, tb);
        std::swap(fa, fb);
      }
      if (ta > t0) {
        t0 = ta;
        face0 = fa;
      }
      if (tb < t1) {
        t1 = tb;
        face1 = fb;
      }
      if (t0 > t1) return std::nullopt;
    }
    if (face0 >= 0) return RayHit{t0, face0};
    // Origin inside the box: the wall seen from within.
    if (face1 >= 0) return RayHit{t1, face1};
    return std::nullopt;
  }

  if (std::abs(d.z()) < 1e-15) return std::nullopt;
  const double t = -o.z() / d.z();
  if (t < t_min || t > t_max) return std::nullopt;
  const double x = o.x() + t * d.x();
  const double y = o.y() + t * d.y();
  if (prim.kind == PrimitiveKind::kRectangle) {
    if (std::abs(x) > h.x() || std::abs(y) > h.y()) return std::nullopt;
  } else if (x * x + y * y > h.x() * h.x()) {
    return std::nullopt;
  }
  return RayHit{t, 0};
}

void SceneModel::validate() const {
  for (const auto& p : primitives) p.validate();
}

SceneModel SceneModel::transformed(const RigidTransform& t) const {
  SceneModel out = *this;
  for (auto& p : out.primitives) p.pose = t * p.pose;
  return out;
}

const Primitive* SceneModel::find(int id) const {
  for (const auto& p : primitives) {
    if (p.id == id) return &p;
  }
  return nullptr;
}

std::optional<BeamHit> trace_beam(const SceneModel& scene, const BeamRay& ray, double min_range, double max_range) {
  std::optional<BeamHit> best;
  double limit = max_range;
  for (std::size_t i = 0; i < scene.primitives.size(); ++i) {
    const Primitive& prim = scene.primitives[i];
    // Bounding-sphere rejection.
    const Vec3 oc = prim.pose.translation() - ray.origin;
    const double along = oc.dot(ray.direction);
    const double rad = prim.bounding_radius();
    if (along + rad < min_range) continue;
    if ((oc - along * ray.direction).squaredNorm() > rad * rad) continue;

    if (auto hit = intersect(prim, ray.origin, ray.direction, min_range, limit)) {
      limit = hit->distance;
      best = BeamHit{hit->distance, static_cast<int>(i), hit->face};
    }
  }
  return best;
}

double range_noise(std::uint64_t seed, std::size_t line, std::size_t beam, double sigma) {
  if (sigma <= 0.0) return 0.0;
  SplitMix64 key(seed);
  const std::uint64_t stream = key() ^ (static_cast<std::uint64_t>(line) << 32) ^ static_cast<std::uint64_t>(beam);
  SplitMix64 engine(stream * 0xd1342543de82ef95ULL + 1);
  std::normal_distribution<double> dist(0.0, sigma);
  return dist(engine);
}

}  // namespace truckloc
