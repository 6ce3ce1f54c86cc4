// truckloc command-line front end: simulate | calibrate | setup-parking | detect | eval.

#include <omp.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "truckloc/calibration.hpp"
#include "truckloc/cloud_io.hpp"
#include "truckloc/error.hpp"
#include "truckloc/metrics.hpp"
#include "truckloc/pipeline.hpp"
#include "truckloc/serialization.hpp"
#include "truckloc/synthetic_scenes.hpp"

namespace fs = std::filesystem;
using namespace truckloc;

namespace {

enum Exit : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kDegenerateExit = 3,
  kWorldFrameExit = 4,
  kEmptyCropExit = 5,
  kEmptyEvalExit = 6,
  kKeypointExit = 7,
  kNotConvergedExit = 8,
};

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kIo:
    case ErrorCode::kParse: return kUsage;
    case ErrorCode::kDegenerate: return kDegenerateExit;
    case ErrorCode::kReflectorNotFound:
    case ErrorCode::kWorldFrameInvalid: return kWorldFrameExit;
    case ErrorCode::kEmptyCrop: return kEmptyCropExit;
    case ErrorCode::kInsufficientEdges:
    case ErrorCode::kDegenerateGeometry: return kKeypointExit;
    case ErrorCode::kNotConverged: return kNotConvergedExit;
  }
  return kInternal;
}

struct Globals {
  std::string config;
  std::uint64_t seed = 1;
  int threads = 0;
  std::string debug_dump;
};

struct LoadedConfig {
  PipelineConfig pipeline;
  bool has_sensor = false;
};

LoadedConfig load_config(const Globals& g) {
  LoadedConfig out;
  if (g.config.empty()) return out;
  const Json j = load_json(g.config);
  out.pipeline = pipeline_config_from_json(j, fs::path(g.config).parent_path());
  out.has_sensor = j.contains("sensor");
  return out;
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

RGB label_color(int label) {
  if (label < 0) return {90, 90, 90};
  const auto h = static_cast<unsigned>(label) * 2654435761u;
  return {static_cast<unsigned char>(64 + (h >> 8) % 192), static_cast<unsigned char>(64 + (h >> 16) % 192),
          static_cast<unsigned char>(64 + (h >> 24) % 192)};
}

// --- simulate -------------------------------------------------------------------------------

struct SimulateArgs {
  std::string scene;
  std::string generate;
  std::string out;
  std::string truth;
  std::string samples;
  std::string scene_out;
  std::string parking_config;
  std::string id;
  std::optional<double> length;
  std::string clutter = "auto";
  std::string rear_fence = "auto";
};

int cmd_simulate(const Globals& g, const SimulateArgs& a) {
  if (a.scene.empty() == a.generate.empty()) {
    std::cerr << "simulate: give exactly one of --scene or --generate\n";
    return kUsage;
  }
  const LoadedConfig cfg = load_config(g);
  SensorConfig sensor = cfg.pipeline.sensor;
  const Extrinsics& extrinsics = cfg.pipeline.extrinsics;

  SceneDocument doc;
  Json truth;
  std::optional<ParkingSetupConfig> parking;
  const ParkingLayout layout;
  if (!a.scene.empty()) {
    doc = scene_from_json(load_json(a.scene));
  } else if (a.generate == "truck") {
    TruckGenOptions opts;
    opts.length = a.length;
    if (a.clutter == "on") opts.clutter_probability = 1.0;
    if (a.clutter == "off") opts.clutter_probability = 0.0;
    if (a.rear_fence == "on") opts.rear_fence_missing_probability = 0.0;
    if (a.rear_fence == "off") opts.rear_fence_missing_probability = 1.0;
    const TruckSpec truck = random_truck(g.seed, opts);
    doc.scene = make_truck_scene(truck, layout);
    doc.sensor = layout.sensor();
    const auto kp = truck.keypoints(layout);
    Annotation ann{a.id.empty() ? "truck_" + std::to_string(g.seed) : a.id,
                   {kp[0], kp[1], kp[2], kp[3], kp[4], kp[5], kp[6], kp[7]},
                   {truck.length, truck.width, truck.height},
                   truck.size_class()};
    truth = annotation_to_json(ann);
    truth["truck"] = {{"length", truck.length},           {"width", truck.width},
                      {"height", truck.height},           {"floor_height", truck.floor_height},
                      {"yaw_deg", rad2deg(truck.yaw)},    {"rear_fence", truck.rear_fence},
                      {"clutter_boxes", truck.clutter.size()}};
  } else if (a.generate == "parking") {
    doc.scene = make_parking_scene(layout);
    doc.sensor = layout.sensor();
    parking = parking_setup_for(layout);
    if (!cfg.has_sensor) sensor.platform_resolution = deg2rad(0.1);
    Json corners = Json::array();
    for (const auto& c : layout.corners()) corners.push_back(vec_to_json(c));
    truth = Json{{"schema_version", kSchemaVersion}, {"frame", "world"}, {"reflector_centers", corners}};
  } else if (a.generate == "calibration") {
    doc.scene = make_calibration_scene(g.seed);
    if (!cfg.has_sensor) sensor = calibration_sensor_config();
    truth = Json{{"schema_version", kSchemaVersion}};
  } else {
    std::cerr << "simulate: unknown --generate kind '" << a.generate << "' (truck, parking, calibration)\n";
    return kUsage;
  }
  if (!truth.is_null()) truth["extrinsics"] = extrinsics_to_json(extrinsics);

  const SimulatedScan scan = simulate_scan(doc.platform_scene(), sensor, extrinsics, g.seed);
  const PointCloud cloud = samples_to_cloud(scan.samples, scan.intensity, extrinsics);
  ensure_parent(a.out);
  write_cloud(a.out, cloud);
  std::cout << "simulate: " << cloud.size() << " points -> " << a.out << "\n";

  if (!a.truth.empty()) {
    if (truth.is_null()) truth = Json{{"schema_version", kSchemaVersion}, {"extrinsics", extrinsics_to_json(extrinsics)}};
    ensure_parent(a.truth);
    save_json(a.truth, truth);
  }
  if (!a.samples.empty()) {
    ensure_parent(a.samples);
    save_json(a.samples, plane_datasets_to_json(plane_datasets_from_scan(scan)));
  }
  if (!a.scene_out.empty()) {
    ensure_parent(a.scene_out);
    save_json(a.scene_out, scene_to_json(doc));
  }
  if (!a.parking_config.empty()) {
    if (!parking) {
      std::cerr << "simulate: --parking-config needs --generate parking\n";
      return kUsage;
    }
    ensure_parent(a.parking_config);
    save_json(a.parking_config, parking_setup_to_json(*parking));
  }
  return kOk;
}

// --- calibrate ------------------------------------------------------------------------------

struct CalibrateArgs {
  std::string planes;
  std::string init;
  std::string out;
  bool estimate_pitch = false;
  bool estimate_ty = false;
};

int cmd_calibrate(const Globals& g, const CalibrateArgs& a) {
  const LoadedConfig cfg = load_config(g);
  const fs::path planes_path(a.planes);
  if (!fs::exists(planes_path)) throw Error(ErrorCode::kIo, "planes file not found: " + a.planes);
  const auto datasets = planes_path.extension() == ".csv" ? plane_datasets_from_csv(planes_path)
                                                          : plane_datasets_from_json(load_json(planes_path));
  const Extrinsics init = a.init.empty() ? cfg.pipeline.extrinsics : extrinsics_from_document(load_json(a.init));
  CalibrationOptions opts;
  opts.estimate_pitch = a.estimate_pitch;
  opts.estimate_translation_y = a.estimate_ty;
  const CalibrationResult r = calibrate(datasets, init, opts);
  ensure_parent(a.out);
  save_json(a.out, calibration_to_json(r));
  const auto& e = r.extrinsics;
  std::printf("calibrate: %zu planes, roll %.4f deg, pitch %.4f deg, yaw %.4f deg, t = (%.2f, %.2f, %.2f) mm\n",
              datasets.size(), rad2deg(e.rotation.roll), rad2deg(e.rotation.pitch), rad2deg(e.rotation.yaw),
              1000 * e.translation.x(), 1000 * e.translation.y(), 1000 * e.translation.z());
  if (!r.unidentifiable.empty()) {
    std::cout << "calibrate: held at initial value:";
    for (const auto& n : r.unidentifiable) std::cout << " " << n;
    std::cout << "\n";
  }
  return kOk;
}

// --- setup-parking --------------------------------------------------------------------------

struct SetupArgs {
  std::string cloud;
  std::string reflectors;
  std::string out;
};

int cmd_setup_parking(const Globals& g, const SetupArgs& a) {
  const LoadedConfig cfg = load_config(g);
  ParkingSetupConfig setup;
  if (!a.reflectors.empty()) {
    setup = parking_setup_from_json(load_json(a.reflectors));
  } else if (cfg.pipeline.parking) {
    setup = *cfg.pipeline.parking;
  } else {
    std::cerr << "setup-parking: reflector configuration required (--reflectors or config 'parking')\n";
    return kUsage;
  }
  const PointCloud cloud = read_cloud(a.cloud);
  std::array<ReflectorFit, 4> fits;
  const WorldFrame wf = setup_parking(cloud, setup, &fits);
  Json doc = world_frame_to_json(wf);
  Json refl = Json::array();
  for (std::size_t i = 0; i < 4; ++i) {
    refl.push_back({{"name", setup.reflectors[i].name},
                    {"center_platform", vec_to_json(fits[i].center)},
                    {"radius", fits[i].radius},
                    {"support", fits[i].support},
                    {"radius_warning", fits[i].radius_warning}});
    if (fits[i].radius_warning) {
      std::cerr << "setup-parking: warning: reflector " << setup.reflectors[i].name << " fitted radius "
                << fits[i].radius << " m differs from expected " << setup.reflectors[i].expected_radius << " m\n";
    }
  }
  doc["reflectors"] = refl;
  ensure_parent(a.out);
  save_json(a.out, doc);
  std::printf("setup-parking: area %.3f x %.3f m, coplanarity %.1f mm -> %s\n", wf.area.x_max, wf.area.y_max,
              1000 * wf.area.coplanarity, a.out.c_str());
  return kOk;
}

// --- detect ---------------------------------------------------------------------------------

struct DetectArgs {
  std::vector<std::string> clouds;
  std::string world;
  std::string out;
  std::string out_dir;
  std::string overlay;
  std::string id;
};

void dump_debug(const fs::path& dir, const std::string& id, const DetectResult& r) {
  fs::create_directories(dir);
  std::vector<RGB> colors(r.working.size());
  for (std::size_t i = 0; i < colors.size(); ++i) colors[i] = label_color(r.segmentation.labels[i]);
  write_overlay_ply(dir / (id + "_regions.ply"), r.working.points, colors, r.segments, {255, 255, 0});
  std::vector<RGB> gray(r.working.size());
  write_overlay_ply(dir / (id + "_contour.ply"), r.working.points, gray, r.compartment.edges);

  Json regions = Json::array();
  for (std::size_t i = 0; i < r.segmentation.regions.size(); ++i) {
    const auto& reg = r.segmentation.regions[i];
    regions.push_back({{"index", i},
                       {"points", reg.members.size()},
                       {"normal", vec_to_json(reg.plane.normal)},
                       {"offset_m", reg.plane.offset},
                       {"scale_m", reg.scale}});
  }
  const auto segments_json = [](const std::vector<LineSegment3D>& segs) {
    Json out = Json::array();
    for (const auto& s : segs) out.push_back({vec_to_json(s.start()), vec_to_json(s.end())});
    return out;
  };
  save_json(dir / (id + "_debug.json"), {{"schema_version", kSchemaVersion},
                                         {"id", id},
                                         {"point_scale_m", r.point_scale},
                                         {"regions", regions},
                                         {"segments", segments_json(r.segments)},
                                         {"edges", segments_json(r.compartment.edges)}});
}

Json error_report(const std::string& id, const Error& e) {
  return {{"schema_version", kSchemaVersion},
          {"id", id},
          {"error", {{"code", to_string(e.code())}, {"exit_code", exit_code_for(e.code())}, {"message", e.what()}}}};
}

int cmd_detect(const Globals& g, const DetectArgs& a) {
  if (a.clouds.size() > 1 && a.out_dir.empty()) {
    std::cerr << "detect: several clouds need --out-dir\n";
    return kUsage;
  }
  if (a.out.empty() && a.out_dir.empty()) {
    std::cerr << "detect: --out or --out-dir required\n";
    return kUsage;
  }
  const LoadedConfig cfg = load_config(g);
  const WorldFrame world = world_frame_from_json(load_json(a.world));
  int worst = kOk;
  for (const auto& path : a.clouds) {
    const std::string id = !a.id.empty() && a.clouds.size() == 1 ? a.id : fs::path(path).stem().string();
    const fs::path out = a.out_dir.empty() ? fs::path(a.out) : fs::path(a.out_dir) / (id + ".json");
    ensure_parent(out);
    try {
      const PointCloud cloud = read_cloud(path);
      const DetectResult r = detect(cloud, world, cfg.pipeline.detect);
      save_json(out, compartment_to_json(id, r));
      if (!a.overlay.empty() && a.clouds.size() == 1) {
        ensure_parent(a.overlay);
        write_overlay_ply(a.overlay, r.working.points, std::vector<RGB>(r.working.size()), r.compartment.edges);
      }
      if (!g.debug_dump.empty()) dump_debug(g.debug_dump, id, r);
      std::printf("detect %s: L %.3f W %.3f H %.3f m\n", id.c_str(), r.compartment.dims.x(), r.compartment.dims.y(),
                  r.compartment.dims.z());
      for (const auto& t : r.timings) std::printf("  %-13s %8.3f s\n", t.stage.c_str(), t.seconds);
      std::printf("  %-13s %8.3f s\n", "total", r.total_seconds());
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kIo || e.code() == ErrorCode::kParse) throw;
      save_json(out, error_report(id, e));
      std::cerr << "detect " << id << ": " << to_string(e.code()) << ": " << e.what() << "\n";
      worst = std::max(worst, exit_code_for(e.code()));
    }
  }
  return worst;
}

// --- eval -----------------------------------------------------------------------------------

struct EvalArgs {
  std::string results;
  std::vector<std::string> annotations;
  std::string report;
};

std::vector<fs::path> json_files(const fs::path& p) {
  std::vector<fs::path> out;
  if (fs::is_directory(p)) {
    for (const auto& entry : fs::directory_iterator(p)) {
      if (entry.is_regular_file() && entry.path().extension() == ".json") out.push_back(entry.path());
    }
    std::sort(out.begin(), out.end());
  } else if (fs::exists(p)) {
    out.push_back(p);
  } else {
    throw Error(ErrorCode::kIo, "not found: " + p.string());
  }
  return out;
}

int cmd_eval(const Globals&, const EvalArgs& a) {
  std::vector<Prediction> predictions;
  for (const auto& f : json_files(a.results)) {
    const Json j = load_json(f);
    if (j.contains("error")) {
      std::cerr << "eval: " << f.filename().string() << " holds a failed detection, skipped\n";
      continue;
    }
    predictions.push_back(prediction_from_json(j));
  }
  std::vector<Annotation> annotations;
  for (const auto& src : a.annotations) {
    for (const auto& f : json_files(src)) {
      auto batch = annotations_from_json(load_json(f));
      annotations.insert(annotations.end(), batch.begin(), batch.end());
    }
  }
  const EvalReport report = evaluate_batch(predictions, annotations);
  for (const auto& id : report.missing_annotation) std::cerr << "eval: warning: no annotation for " << id << "\n";
  for (const auto& id : report.missing_prediction) std::cerr << "eval: warning: no prediction for " << id << "\n";
  if (report.vehicles.empty()) {
    std::cerr << "eval: no prediction matches any annotation id\n";
    return kEmptyEvalExit;
  }
  if (!a.report.empty()) {
    ensure_parent(a.report);
    save_json(a.report, report_to_json(report));
  }
  std::cout << render_table(report);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Truck compartment localization with a rotating 2-D LiDAR"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "pipeline configuration JSON")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "random seed for simulation and scene generation");
  app.add_option("--threads", g.threads, "OpenMP thread count (0 = runtime default)")->check(CLI::NonNegativeNumber);
  app.add_option("--debug-dump", g.debug_dump, "directory for intermediate clouds");

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "ray-cast a scene into a point cloud");
  s->add_option("--scene", sim.scene, "scene JSON")->check(CLI::ExistingFile);
  s->add_option("--generate", sim.generate, "built-in scene: truck | parking | calibration");
  s->add_option("--out", sim.out, "output cloud (.pcd or .ply)")->required();
  s->add_option("--truth", sim.truth, "ground-truth JSON");
  s->add_option("--samples", sim.samples, "raw samples grouped per primitive (calibration input)");
  s->add_option("--scene-out", sim.scene_out, "write the scene that was scanned");
  s->add_option("--parking-config", sim.parking_config, "reflector configuration for a parking scene");
  s->add_option("--id", sim.id, "vehicle id in the truth file");
  s->add_option("--length", sim.length, "truck length, meters");
  s->add_option("--clutter", sim.clutter, "interior clutter: auto | on | off")
      ->check(CLI::IsMember({"auto", "on", "off"}));
  s->add_option("--rear-fence", sim.rear_fence, "rear fence: auto | on | off")
      ->check(CLI::IsMember({"auto", "on", "off"}));

  CalibrateArgs cal;
  auto* c = app.add_subcommand("calibrate", "estimate LiDAR-to-platform extrinsics from plane scans");
  c->add_option("--planes", cal.planes, "plane samples (.csv or .json)")->required();
  c->add_option("--init", cal.init, "initial extrinsics JSON");
  c->add_option("--out", cal.out, "calibration result JSON")->required();
  c->add_flag("--estimate-pitch", cal.estimate_pitch, "also estimate w_y");
  c->add_flag("--estimate-ty", cal.estimate_ty, "also estimate t_y");

  SetupArgs setup;
  auto* p = app.add_subcommand("setup-parking", "locate the reflectors and build world frame A");
  p->add_option("--cloud", setup.cloud, "empty parking-area cloud")->required();
  p->add_option("--reflectors", setup.reflectors, "reflector configuration JSON");
  p->add_option("--out", setup.out, "world frame JSON")->required();

  DetectArgs det;
  auto* d = app.add_subcommand("detect", "localize the compartment key points");
  d->add_option("clouds", det.clouds, "vehicle clouds")->required();
  d->add_option("--world", det.world, "world frame JSON from setup-parking")->required();
  d->add_option("--out", det.out, "result JSON (single cloud)");
  d->add_option("--out-dir", det.out_dir, "result directory (one JSON per cloud)");
  d->add_option("--overlay", det.overlay, "overlay PLY with the detected contour");
  d->add_option("--id", det.id, "vehicle id (default: cloud file stem)");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "score results against annotations");
  e->add_option("--results", ev.results, "result JSON file or directory")->required();
  e->add_option("--annotations", ev.annotations, "annotation files or directories")->required();
  e->add_option("--report", ev.report, "report JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? kOk : kUsage;
  }
  if (g.threads > 0) omp_set_num_threads(g.threads);

  try {
    if (*s) return cmd_simulate(g, sim);
    if (*c) return cmd_calibrate(g, cal);
    if (*p) return cmd_setup_parking(g, setup);
    if (*d) return cmd_detect(g, det);
    if (*e) return cmd_eval(g, ev);
  } catch (const DegeneracyError& err) {
    std::cerr << "error: " << err.what() << "\nunconstrained parameters:";
    for (const auto& n : err.unconstrained()) std::cerr << " " << n;
    std::cerr << "\n";
    return kDegenerateExit;
  } catch (const Error& err) {
    std::cerr << "error: " << to_string(err.code()) << ": " << err.what() << "\n";
    return exit_code_for(err.code());
  } catch (const fs::filesystem_error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kUsage;
  } catch (const std::exception& err) {
    std::cerr << "internal error: " << err.what() << "\n";
    return kInternal;
  }
  return kInternal;
}
