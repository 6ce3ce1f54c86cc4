#include "truckloc/scene.hpp"

namespace truckloc::reference {

SimulatedScan simulate_scan_serial(const SceneModel& scene, const SensorConfig& cfg, const Extrinsics& e,
                                   std::uint64_t seed) {
  cfg.validate();
  scene.validate();
  SimulatedScan out;
  if (scene.empty()) return out;

  for (std::size_t line = 0; line < cfg.line_count(); ++line) {
    for (std::size_t beam = 0; beam < cfg.beam_count(); ++beam) {
      const double theta = cfg.azimuth_at(beam);
      const double phi = cfg.platform_at(line);
      const Mat3 q = platform_rotation(phi);
      const BeamRay ray{q * e.translation, (q * e.rotation_matrix()) * beam_direction(theta)};
      const auto hit = trace_beam(scene, ray, cfg.min_range, cfg.max_range);
      if (!hit) continue;
      const double r = hit->range + range_noise(seed, line, beam, cfg.range_noise_sigma);
      if (r <= cfg.min_range) continue;
      const Primitive& prim = scene.primitives[static_cast<std::size_t>(hit->primitive_index)];
      out.samples.push_back({r, theta, phi});
      out.intensity.push_back(prim.intensity);
      out.primitive_id.push_back(prim.id);
      out.face.push_back(hit->face);
    }
  }
  return out;
}

}  // namespace truckloc::reference
