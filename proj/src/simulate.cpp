#include <vector>

#include "truckloc/error.hpp"
#include "truckloc/scene.hpp"

namespace truckloc {

namespace {

struct LineBuffer {
  std::vector<ScanSample> samples;
  std::vector<float> intensity;
  std::vector<int> primitive_id;
  std::vector<int> face;
};

}  // namespace

SimulatedScan simulate_scan(const SceneModel& scene, const SensorConfig& cfg, const Extrinsics& e,
                            std::uint64_t seed) {
  cfg.validate();
  scene.validate();
  SimulatedScan out;
  if (scene.empty()) return out;

  const std::size_t lines = cfg.line_count();
  const std::size_t beams = cfg.beam_count();
  const Mat3 rw = e.rotation_matrix();
  std::vector<LineBuffer> buffers(lines);

  const auto n_lines = static_cast<std::ptrdiff_t>(lines);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t li = 0; li < n_lines; ++li) {
    const auto line = static_cast<std::size_t>(li);
    const double phi = cfg.platform_at(line);
    const Mat3 q = platform_rotation(phi);
    const Vec3 origin = q * e.translation;
    const Mat3 qrw = q * rw;
    LineBuffer& buf = buffers[line];
    for (std::size_t beam = 0; beam < beams; ++beam) {
      const double theta = cfg.azimuth_at(beam);
      const BeamRay ray{origin, qrw * beam_direction(theta)};
      const auto hit = trace_beam(scene, ray, cfg.min_range, cfg.max_range);
      if (!hit) continue;
      const double r = hit->range + range_noise(seed, line, beam, cfg.range_noise_sigma);
      if (r <= cfg.min_range) continue;
      const Primitive& prim = scene.primitives[static_cast<std::size_t>(hit->primitive_index)];
      buf.samples.push_back({r, theta, phi});
      buf.intensity.push_back(prim.intensity);
      buf.primitive_id.push_back(prim.id);
      buf.face.push_back(hit->face);
    }
  }

  std::size_t total = 0;
  for (const auto& b : buffers) total += b.samples.size();
  out.samples.reserve(total);
  out.intensity.reserve(total);
  out.primitive_id.reserve(total);
  out.face.reserve(total);
  for (auto& b : buffers) {
    out.samples.insert(out.samples.end(), b.samples.begin(), b.samples.end());
    out.intensity.insert(out.intensity.end(), b.intensity.begin(), b.intensity.end());
    out.primitive_id.insert(out.primitive_id.end(), b.primitive_id.begin(), b.primitive_id.end());
    out.face.insert(out.face.end(), b.face.begin(), b.face.end());
  }
  return out;
}

}  // namespace truckloc
