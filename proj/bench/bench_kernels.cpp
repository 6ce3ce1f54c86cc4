// Serial reference kernels against their OpenMP counterparts on one truck scan.

#include <benchmark/benchmark.h>
#include <omp.h>

#include "truckloc/normals.hpp"
#include "truckloc/pipeline.hpp"
#include "truckloc/scan_model.hpp"
#include "truckloc/synthetic_scenes.hpp"

using namespace truckloc;

namespace {

struct Fixture {
  ParkingLayout layout;
  SceneModel scene;  // platform frame
  SensorConfig sensor;
  PointCloud cloud;
  WorldFrame world;
  PointCloud working;  // cropped and downsampled

  Fixture() {
    const RigidTransform to_o = layout.sensor().world_to_platform();
    SensorConfig parking_sensor;
    parking_sensor.platform_resolution = deg2rad(0.1);
    const SimulatedScan empty = simulate_scan(make_parking_scene(layout).transformed(to_o), parking_sensor, {}, 1);
    world = setup_parking(samples_to_cloud(empty.samples, empty.intensity, {}), parking_setup_for(layout));

    scene = make_truck_scene(random_truck(3), layout).transformed(to_o);
    const SimulatedScan scan = simulate_scan(scene, sensor, {}, 3);
    cloud = samples_to_cloud(scan.samples, scan.intensity, {});
    working = voxel_downsample(crop_to_parking(cloud, world.a_from_o, world.area, world.crop), 0.02);
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void threads_arg(benchmark::State& state) { omp_set_num_threads(static_cast<int>(state.range(0))); }

void BM_SimulateSerial(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(reference::simulate_scan_serial(f.scene, f.sensor, {}, 3));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(f.sensor.beam_count() * f.sensor.line_count()));
}

void BM_Simulate(benchmark::State& state) {
  const auto& f = fixture();
  threads_arg(state);
  for (auto _ : state) benchmark::DoNotOptimize(simulate_scan(f.scene, f.sensor, {}, 3));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(f.sensor.beam_count() * f.sensor.line_count()));
}

void BM_NormalsSerial(benchmark::State& state) {
  const auto& f = fixture();
  const Vec3 vp = f.world.a_from_o.translation();
  for (auto _ : state) benchmark::DoNotOptimize(reference::estimate_normals_serial(f.working.points, 33, vp));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(f.working.size()));
}

void BM_Normals(benchmark::State& state) {
  const auto& f = fixture();
  threads_arg(state);
  const Vec3 vp = f.world.a_from_o.translation();
  for (auto _ : state) benchmark::DoNotOptimize(estimate_normals(f.working.points, 33, vp));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(f.working.size()));
}

void BM_CropSerial(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(reference::crop_to_parking_serial(f.cloud, f.world.a_from_o, f.world.area, f.world.crop));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(f.cloud.size()));
}

void BM_Crop(benchmark::State& state) {
  const auto& f = fixture();
  threads_arg(state);
  for (auto _ : state) benchmark::DoNotOptimize(crop_to_parking(f.cloud, f.world.a_from_o, f.world.area, f.world.crop));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(f.cloud.size()));
}

void BM_Detect(benchmark::State& state) {
  const auto& f = fixture();
  threads_arg(state);
  const DetectConfig config;
  for (auto _ : state) benchmark::DoNotOptimize(detect(f.cloud, f.world, config));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(f.cloud.size()));
}

void thread_counts(benchmark::internal::Benchmark* b) {
  const int max = omp_get_num_procs();
  for (int t = 1; t <= max; t *= 2) b->Arg(t);
  if ((max & (max - 1)) != 0) b->Arg(max);
}

}  // namespace

BENCHMARK(BM_SimulateSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Simulate)->Apply(thread_counts)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_NormalsSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Normals)->Apply(thread_counts)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_CropSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Crop)->Apply(thread_counts)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Detect)->Apply(thread_counts)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
