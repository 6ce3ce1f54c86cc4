#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "truckloc/geometry.hpp"
#include "truckloc/scan_model.hpp"

namespace truckloc {

enum class PrimitiveKind { kBox, kRectangle, kDisc };

/// Textured surface used by the scan simulator. The local frame is mapped into
/// the scene by `pose`; a rectangle spans local x/y, a disc lies in local z = 0.
struct Primitive {
  PrimitiveKind kind = PrimitiveKind::kBox;
  int id = 0;
  std::string label;
  RigidTransform pose;
  Vec3 half_extents = Vec3::Constant(0.5);  // disc: x holds the radius
  float intensity = 0.5f;

  static Primitive box(int id, const Vec3& center, const Vec3& size, double yaw, float intensity,
                       std::string label = {});
  static Primitive rectangle(int id, const RigidTransform& pose, double size_x, double size_y, float intensity,
                             std::string label = {});
  static Primitive disc(int id, const Vec3& center, const Vec3& normal, double radius, float intensity,
                        std::string label = {});

  void validate() const;
  double bounding_radius() const { return half_extents.norm(); }
};

struct RayHit {
  double distance;
  int face;  // box: 0..5 for -x,+x,-y,+y,-z,+z; otherwise 0
};

std::optional<RayHit> intersect(const Primitive& prim, const Vec3& origin, const Vec3& direction, double t_min,
                                double t_max);

struct SceneModel {
  std::vector<Primitive> primitives;

  void validate() const;
  bool empty() const { return primitives.empty(); }
  SceneModel transformed(const RigidTransform& t) const;
  const Primitive* find(int id) const;
};

/// Simulator output; all vectors share one index.
struct SimulatedScan {
  std::vector<ScanSample> samples;
  std::vector<float> intensity;
  std::vector<int> primitive_id;
  std::vector<int> face;

  std::size_t size() const { return samples.size(); }
};

/// Casts one ray per (azimuth, platform) grid cell and keeps the nearest hit.
/// Range noise is Gaussian on r, drawn from a per-ray stream keyed by seed so the
/// output does not depend on the thread count.
SimulatedScan simulate_scan(const SceneModel& scene, const SensorConfig& cfg, const Extrinsics& e,
                            std::uint64_t seed);

/// Nearest surface hit along one beam, or nullopt.
struct BeamHit {
  double range;
  int primitive_index;
  int face;
};
std::optional<BeamHit> trace_beam(const SceneModel& scene, const BeamRay& ray, double min_range, double max_range);

/// Deterministic N(0, sigma) draw for grid cell (line, beam).
double range_noise(std::uint64_t seed, std::size_t line, std::size_t beam, double sigma);

namespace reference {

/// Single-threaded reference for simulate_scan.
SimulatedScan simulate_scan_serial(const SceneModel& scene, const SensorConfig& cfg, const Extrinsics& e,
                                   std::uint64_t seed);

}  // namespace reference

}  // namespace truckloc
