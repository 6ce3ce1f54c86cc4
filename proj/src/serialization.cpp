#include "truckloc/serialization.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "truckloc/error.hpp"

namespace truckloc {
namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::kParse, what); }

const Json& require(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) bad(std::string("missing field '") + key + "'");
  return j.at(key);
}

double number(const Json& j, const char* key) {
  const Json& v = require(j, key);
  if (!v.is_number()) bad(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

double number_or(const Json& j, const char* key, double fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  if (!j.at(key).is_number()) bad(std::string("field '") + key + "' must be a number");
  return j.at(key).get<double>();
}

Json mat3_to_json(const Mat3& m) {
  Json out = Json::array();
  for (int r = 0; r < 3; ++r) out.push_back({m(r, 0), m(r, 1), m(r, 2)});
  return out;
}

Mat3 mat3_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 3) bad("rotation must be a 3x3 array");
  Mat3 m;
  for (int r = 0; r < 3; ++r) {
    const Json& row = j.at(static_cast<std::size_t>(r));
    if (!row.is_array() || row.size() != 3) bad("rotation must be a 3x3 array");
    for (int c = 0; c < 3; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

Json transform_to_json(const RigidTransform& t) {
  return {{"translation", vec_to_json(t.translation())}, {"rotation", mat3_to_json(t.rotation())}};
}

RigidTransform transform_from_json(const Json& j) {
  try {
    return {mat3_from_json(require(j, "rotation")), vec_from_json(require(j, "translation"))};
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kParse) throw;
    bad(std::string("invalid pose: ") + e.what());
  }
}

Json mat4_to_json(const Mat4& m) {
  Json out = Json::array();
  for (int r = 0; r < 4; ++r) out.push_back({m(r, 0), m(r, 1), m(r, 2), m(r, 3)});
  return out;
}

Mat4 mat4_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 4) bad("matrix must be 4x4");
  Mat4 m;
  for (int r = 0; r < 4; ++r) {
    const Json& row = j.at(static_cast<std::size_t>(r));
    if (!row.is_array() || row.size() != 4) bad("matrix must be 4x4");
    for (int c = 0; c < 4; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

Json versioned(Json body) {
  Json out = {{"schema_version", kSchemaVersion}};
  for (auto& [k, v] : body.items()) out[k] = v;
  return out;
}

void check_version(const Json& j) {
  if (j.is_object() && j.contains("schema_version")) {
    const Json& v = j.at("schema_version");
    if (!v.is_number_integer() || v.get<int>() != kSchemaVersion) {
      bad("unsupported schema_version " + v.dump() + " (expected " + std::to_string(kSchemaVersion) + ")");
    }
  }
}

const char* kind_name(PrimitiveKind k) {
  switch (k) {
    case PrimitiveKind::kBox: return "box";
    case PrimitiveKind::kRectangle: return "rectangle";
    case PrimitiveKind::kDisc: return "disc";
  }
  return "box";
}

Json primitive_to_json(const Primitive& p) {
  Json out = {{"type", kind_name(p.kind)}, {"id", p.id}, {"label", p.label}, {"intensity", p.intensity}};
  switch (p.kind) {
    case PrimitiveKind::kBox: out["size"] = vec_to_json(2.0 * p.half_extents); break;
    case PrimitiveKind::kRectangle: out["size"] = {2.0 * p.half_extents.x(), 2.0 * p.half_extents.y()}; break;
    case PrimitiveKind::kDisc: out["radius"] = p.half_extents.x(); break;
  }
  out["pose"] = transform_to_json(p.pose);
  return out;
}

Primitive primitive_from_json(const Json& j) {
  const std::string type = require(j, "type").get<std::string>();
  const int id = j.value("id", 0);
  const std::string label = j.value("label", std::string{});
  const auto intensity = static_cast<float>(number_or(j, "intensity", 0.5));
  Primitive p;
  const auto pose = [&]() -> RigidTransform {
    if (j.contains("pose")) return transform_from_json(j.at("pose"));
    const double yaw = deg2rad(number_or(j, "yaw_deg", 0.0));
    return {rotation_z(yaw), vec_from_json(require(j, "center"))};
  };
  if (type == "box") {
    p = Primitive::box(id, Vec3::Zero(), vec_from_json(require(j, "size")), 0.0, intensity, label);
    p.pose = pose();
  } else if (type == "rectangle") {
    const Json& size = require(j, "size");
    if (!size.is_array() || size.size() != 2) bad("rectangle size must be [sx, sy]");
    p = Primitive::rectangle(id, pose(), size[0].get<double>(), size[1].get<double>(), intensity, label);
  } else if (type == "disc") {
    const double radius = number(j, "radius");
    if (j.contains("pose")) {
      p = Primitive::disc(id, Vec3::Zero(), Vec3::UnitZ(), radius, intensity, label);
      p.pose = transform_from_json(j.at("pose"));
    } else {
      p = Primitive::disc(id, vec_from_json(require(j, "center")), vec_from_json(require(j, "normal")), radius,
                          intensity, label);
    }
  } else {
    bad("unknown primitive type '" + type + "'");
  }
  try {
    p.validate();
  } catch (const Error& e) {
    bad("primitive " + std::to_string(id) + ": " + e.what());
  }
  return p;
}

ReflectorSpec reflector_from_json(const Json& j) {
  ReflectorSpec r;
  r.name = j.value("name", std::string{});
  r.seed_region = {vec_from_json(require(j, "seed_min")), vec_from_json(require(j, "seed_max"))};
  r.intensity_threshold = number_or(j, "intensity_threshold", r.intensity_threshold);
  r.expected_radius = number_or(j, "expected_radius", r.expected_radius);
  return r;
}

Json corners_to_json(std::span<const Vec3> pts) {
  Json out = Json::array();
  for (const auto& p : pts) out.push_back(vec_to_json(p));
  return out;
}

Corners corners_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 8) bad("expected 8 corner points");
  Corners c;
  for (std::size_t i = 0; i < 8; ++i) c[i] = vec_from_json(j[i]);
  return c;
}

}  // namespace

Json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
}

void save_json(const std::filesystem::path& path, const Json& doc) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out << doc.dump(2) << "\n";
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path.string());
}

Json vec_to_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 3) bad("expected a 3-vector, got " + j.dump());
  for (const auto& x : j) {
    if (!x.is_number()) bad("expected a 3-vector of numbers, got " + j.dump());
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Json sensor_to_json(const SensorConfig& c) {
  return {{"azimuth_min_deg", rad2deg(c.azimuth_min)},
          {"azimuth_max_deg", rad2deg(c.azimuth_max)},
          {"beam_resolution_deg", rad2deg(c.beam_resolution)},
          {"platform_min_deg", rad2deg(c.platform_min)},
          {"platform_max_deg", rad2deg(c.platform_max)},
          {"platform_resolution_deg", rad2deg(c.platform_resolution)},
          {"scan_frequency_hz", c.scan_frequency_hz},
          {"range_noise_sigma_m", c.range_noise_sigma},
          {"mount_height_m", c.mount_height},
          {"min_range_m", c.min_range},
          {"max_range_m", c.max_range}};
}

SensorConfig sensor_from_json(const Json& j, SensorConfig c) {
  const auto deg = [&](const char* key, double& field) {
    if (j.contains(key)) field = deg2rad(number(j, key));
  };
  deg("azimuth_min_deg", c.azimuth_min);
  deg("azimuth_max_deg", c.azimuth_max);
  deg("beam_resolution_deg", c.beam_resolution);
  deg("platform_min_deg", c.platform_min);
  deg("platform_max_deg", c.platform_max);
  deg("platform_resolution_deg", c.platform_resolution);
  c.scan_frequency_hz = number_or(j, "scan_frequency_hz", c.scan_frequency_hz);
  c.range_noise_sigma = number_or(j, "range_noise_sigma_m", c.range_noise_sigma);
  c.mount_height = number_or(j, "mount_height_m", c.mount_height);
  c.min_range = number_or(j, "min_range_m", c.min_range);
  c.max_range = number_or(j, "max_range_m", c.max_range);
  try {
    c.validate();
  } catch (const Error& e) {
    bad(std::string("sensor: ") + e.what());
  }
  return c;
}

Json extrinsics_to_json(const Extrinsics& e) {
  return {{"roll_deg", rad2deg(e.rotation.roll)},   {"pitch_deg", rad2deg(e.rotation.pitch)},
          {"yaw_deg", rad2deg(e.rotation.yaw)},     {"t_x_m", e.translation.x()},
          {"t_y_m", e.translation.y()},   {"t_z_m", e.translation.z()}};
}

Extrinsics extrinsics_from_json(const Json& j) {
  if (!j.is_object()) bad("extrinsics must be an object");
  Extrinsics e;
  e.rotation.roll = deg2rad(number_or(j, "roll_deg", 0.0));
  e.rotation.pitch = deg2rad(number_or(j, "pitch_deg", 0.0));
  e.rotation.yaw = deg2rad(number_or(j, "yaw_deg", 0.0));
  e.translation = Vec3(number_or(j, "t_x_m", 0.0), number_or(j, "t_y_m", 0.0), number_or(j, "t_z_m", 0.0));
  return e;
}

Json calibration_to_json(const CalibrationResult& r) {
  const Extrinsics se{r.rotation_std_error, r.translation_std_error};
  Json planes = Json::array();
  for (const auto& p : r.planes) planes.push_back({{"normal", vec_to_json(p.normal)}, {"offset_m", p.offset}});
  return versioned({{"extrinsics", extrinsics_to_json(r.extrinsics)},
                    {"standard_error", extrinsics_to_json(se)},
                    {"rotational_residual_norm", r.rotational_residual_norm},
                    {"translational_residual_norm_m", r.translational_residual_norm},
                    {"iterations", {{"rotational", r.rotational_iterations},
                                    {"translational", r.translational_iterations}}},
                    {"unidentifiable", r.unidentifiable},
                    {"planes", planes}});
}

Extrinsics extrinsics_from_document(const Json& j) {
  check_version(j);
  if (j.is_object() && j.contains("extrinsics")) return extrinsics_from_json(j.at("extrinsics"));
  return extrinsics_from_json(j);
}

std::vector<PlaneDataset> plane_datasets_from_json(const Json& j) {
  check_version(j);
  const Json& planes = require(j, "planes");
  if (!planes.is_array()) bad("'planes' must be an array");
  std::vector<PlaneDataset> out;
  for (const auto& p : planes) {
    PlaneDataset d;
    d.id = require(p, "id").get<int>();
    for (const auto& s : require(p, "samples")) {
      if (!s.is_array() || s.size() != 3) bad("samples are [range_m, azimuth_rad, platform_rad]");
      d.samples.push_back({s[0].get<double>(), s[1].get<double>(), s[2].get<double>()});
    }
    out.push_back(std::move(d));
  }
  return out;
}

Json plane_datasets_to_json(const std::vector<PlaneDataset>& datasets) {
  Json planes = Json::array();
  for (const auto& d : datasets) {
    Json samples = Json::array();
    for (const auto& s : d.samples) samples.push_back({s.range, s.azimuth, s.platform_angle});
    planes.push_back({{"id", d.id}, {"samples", samples}});
  }
  return versioned({{"units", "range_m, azimuth_rad, platform_rad"}, {"planes", planes}});
}

std::vector<PlaneDataset> plane_datasets_from_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::map<int, PlaneDataset> by_id;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (line_no == 1 && line.find_first_of("0123456789") != 0 && line[0] != '-') continue;  // header
    std::istringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 4) bad(path.string() + ":" + std::to_string(line_no) + ": expected 4 columns");
    try {
      const int id = std::stoi(cells[0]);
      auto& d = by_id[id];
      d.id = id;
      d.samples.push_back({std::stod(cells[1]), std::stod(cells[2]), std::stod(cells[3])});
    } catch (const std::logic_error&) {
      bad(path.string() + ":" + std::to_string(line_no) + ": bad number");
    }
  }
  std::vector<PlaneDataset> out;
  for (auto& [id, d] : by_id) out.push_back(std::move(d));
  return out;
}

SceneModel SceneDocument::platform_scene() const {
  return sensor ? scene.transformed(sensor->world_to_platform()) : scene;
}

Json scene_to_json(const SceneDocument& doc) {
  Json prims = Json::array();
  for (const auto& p : doc.scene.primitives) prims.push_back(primitive_to_json(p));
  Json body;
  if (doc.sensor) body["sensor"] = {{"position", vec_to_json(doc.sensor->position)}, {"yaw_deg", rad2deg(doc.sensor->yaw)}};
  body["primitives"] = prims;
  return versioned(body);
}

SceneDocument scene_from_json(const Json& j) {
  check_version(j);
  SceneDocument doc;
  if (j.contains("sensor")) {
    const Json& s = j.at("sensor");
    doc.sensor = SensorPlacement{vec_from_json(require(s, "position")), deg2rad(number_or(s, "yaw_deg", 0.0))};
  }
  const Json& prims = require(j, "primitives");
  if (!prims.is_array()) bad("'primitives' must be an array");
  for (const auto& p : prims) doc.scene.primitives.push_back(primitive_from_json(p));
  return doc;
}

Json parking_setup_to_json(const ParkingSetupConfig& cfg) {
  Json refl = Json::array();
  for (const auto& r : cfg.reflectors) {
    refl.push_back({{"name", r.name},
                    {"seed_min", vec_to_json(r.seed_region.min)},
                    {"seed_max", vec_to_json(r.seed_region.max)},
                    {"intensity_threshold", r.intensity_threshold},
                    {"expected_radius", r.expected_radius}});
  }
  return versioned({{"reflectors", refl}, {"crop", {{"z_min", cfg.crop.z_min}, {"z_max", cfg.crop.z_max}}}});
}

ParkingSetupConfig parking_setup_from_json(const Json& j) {
  check_version(j);
  ParkingSetupConfig cfg;
  const Json& refl = require(j, "reflectors");
  if (!refl.is_array() || refl.size() != 4) bad("'reflectors' must list exactly 4 boards (P1..P4)");
  for (std::size_t i = 0; i < 4; ++i) {
    cfg.reflectors[i] = reflector_from_json(refl[i]);
    if (cfg.reflectors[i].name.empty()) cfg.reflectors[i].name = "P" + std::to_string(i + 1);
  }
  if (j.contains("crop")) {
    cfg.crop.z_min = number_or(j.at("crop"), "z_min", cfg.crop.z_min);
    cfg.crop.z_max = number_or(j.at("crop"), "z_max", cfg.crop.z_max);
  }
  return cfg;
}

Json world_frame_to_json(const WorldFrame& wf) {
  return versioned({{"a_from_o", mat4_to_json(wf.a_from_o.matrix())},
                    {"corners_platform", corners_to_json(wf.area.corners)},
                    {"x_max", wf.area.x_max},
                    {"y_max", wf.area.y_max},
                    {"coplanarity_m", wf.area.coplanarity},
                    {"rectangularity", wf.area.rectangularity},
                    {"crop", {{"z_min", wf.crop.z_min}, {"z_max", wf.crop.z_max}}}});
}

WorldFrame world_frame_from_json(const Json& j) {
  check_version(j);
  WorldFrame wf;
  try {
    wf.a_from_o = RigidTransform::from_matrix(mat4_from_json(require(j, "a_from_o")));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kParse) throw;
    bad(std::string("a_from_o: ") + e.what());
  }
  const Json& c = require(j, "corners_platform");
  if (!c.is_array() || c.size() != 4) bad("corners_platform must hold 4 points");
  for (std::size_t i = 0; i < 4; ++i) wf.area.corners[i] = vec_from_json(c[i]);
  wf.area.x_max = number(j, "x_max");
  wf.area.y_max = number(j, "y_max");
  wf.area.coplanarity = number_or(j, "coplanarity_m", 0.0);
  wf.area.rectangularity = number_or(j, "rectangularity", 0.0);
  const Json& crop = require(j, "crop");
  wf.crop = {number(crop, "z_min"), number(crop, "z_max")};
  return wf;
}

Json detect_config_to_json(const DetectConfig& c) {
  Json lines = {{"cell_factor", c.lines.cell_factor},
                {"splat_neighbor", c.lines.splat_neighbor},
                {"max_splat_cells", c.lines.max_splat_cells}};
  if (c.lines.outlier_threshold) lines["th_o_m"] = *c.lines.outlier_threshold;
  if (c.lines.min_length) lines["th_p_m"] = *c.lines.min_length;
  return {{"voxel_size_m", c.voxel_size},
          {"segmentation", {{"k", c.segmentation.k},
                            {"delta_deg", rad2deg(c.segmentation.delta)},
                            {"min_region_size", c.segmentation.min_region_size},
                            {"inlier_tolerance_m", c.segmentation.inlier_tolerance},
                            {"max_seed_curvature", c.segmentation.max_seed_curvature}}},
          {"lines", lines},
          {"fusion", {{"latitude_bin_deg", rad2deg(c.keypoints.fusion.latitude_bin)},
                      {"relative_offset_max", c.keypoints.fusion.relative_offset_max},
                      {"perp_factor", c.keypoints.fusion.perp_factor}}},
          {"cluster", {{"th_a", c.keypoints.cluster.th_a},
                       {"th_b_m", c.keypoints.cluster.th_b},
                       {"min_separation_m", c.keypoints.cluster.min_separation}}},
          {"coplanar_angle_deg", rad2deg(c.coplanar_angle)},
          {"coplanar_offset_factor", c.coplanar_offset_factor}};
}

DetectConfig detect_config_from_json(const Json& j, DetectConfig c) {
  c.voxel_size = number_or(j, "voxel_size_m", c.voxel_size);
  if (j.contains("segmentation")) {
    const Json& s = j.at("segmentation");
    c.segmentation.k = static_cast<int>(number_or(s, "k", c.segmentation.k));
    c.segmentation.delta = deg2rad(number_or(s, "delta_deg", rad2deg(c.segmentation.delta)));
    c.segmentation.min_region_size =
        static_cast<std::size_t>(number_or(s, "min_region_size", static_cast<double>(c.segmentation.min_region_size)));
    c.segmentation.inlier_tolerance = number_or(s, "inlier_tolerance_m", c.segmentation.inlier_tolerance);
    c.segmentation.max_seed_curvature = number_or(s, "max_seed_curvature", c.segmentation.max_seed_curvature);
  }
  if (j.contains("lines")) {
    const Json& l = j.at("lines");
    if (l.contains("th_o_m")) c.lines.outlier_threshold = number(l, "th_o_m");
    if (l.contains("th_p_m")) c.lines.min_length = number(l, "th_p_m");
    c.lines.cell_factor = number_or(l, "cell_factor", c.lines.cell_factor);
    c.lines.splat_neighbor = static_cast<int>(number_or(l, "splat_neighbor", c.lines.splat_neighbor));
    c.lines.max_splat_cells = number_or(l, "max_splat_cells", c.lines.max_splat_cells);
  }
  if (j.contains("fusion")) {
    const Json& f = j.at("fusion");
    auto& fp = c.keypoints.fusion;
    fp.latitude_bin = deg2rad(number_or(f, "latitude_bin_deg", rad2deg(fp.latitude_bin)));
    fp.relative_offset_max = number_or(f, "relative_offset_max", fp.relative_offset_max);
    fp.perp_factor = number_or(f, "perp_factor", fp.perp_factor);
  }
  if (j.contains("cluster")) {
    const Json& k = j.at("cluster");
    auto& cp = c.keypoints.cluster;
    cp.th_a = number_or(k, "th_a", cp.th_a);
    cp.th_b = number_or(k, "th_b_m", cp.th_b);
    cp.min_separation = number_or(k, "min_separation_m", cp.min_separation);
  }
  c.coplanar_angle = deg2rad(number_or(j, "coplanar_angle_deg", rad2deg(c.coplanar_angle)));
  c.coplanar_offset_factor = number_or(j, "coplanar_offset_factor", c.coplanar_offset_factor);
  try {
    c.validate();
  } catch (const Error& e) {
    bad(std::string("detect config: ") + e.what());
  }
  return c;
}

PipelineConfig pipeline_config_from_json(const Json& j, const std::filesystem::path& base_dir) {
  check_version(j);
  if (!j.is_object()) bad("config must be a JSON object");
  PipelineConfig cfg;
  const auto resolve_path = [&](const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
  };
  if (j.contains("sensor")) cfg.sensor = sensor_from_json(j.at("sensor"));
  if (j.contains("extrinsics")) cfg.extrinsics = extrinsics_from_json(j.at("extrinsics"));
  if (j.contains("extrinsics_file")) {
    cfg.extrinsics = extrinsics_from_document(load_json(resolve_path(j.at("extrinsics_file").get<std::string>())));
  }
  if (j.contains("parking")) cfg.parking = parking_setup_from_json(j.at("parking"));
  if (j.contains("parking_file")) {
    cfg.parking = parking_setup_from_json(load_json(resolve_path(j.at("parking_file").get<std::string>())));
  }
  if (j.contains("detect")) cfg.detect = detect_config_from_json(j.at("detect"));
  return cfg;
}

Json pipeline_config_to_json(const PipelineConfig& cfg) {
  Json body = {{"sensor", sensor_to_json(cfg.sensor)}, {"extrinsics", extrinsics_to_json(cfg.extrinsics)}};
  if (cfg.parking) body["parking"] = parking_setup_to_json(*cfg.parking);
  body["detect"] = detect_config_to_json(cfg.detect);
  return versioned(body);
}

Json annotation_to_json(const Annotation& a) {
  return versioned({{"id", a.id},
                    {"frame", "A"},
                    {"points", corners_to_json(a.points)},
                    {"dims", vec_to_json(a.dims)},
                    {"size_class", a.size_class}});
}

Annotation annotation_from_json(const Json& j) {
  check_version(j);
  Annotation a;
  a.id = require(j, "id").get<std::string>();
  a.points = corners_from_json(require(j, "points"));
  a.dims = vec_from_json(require(j, "dims"));
  a.size_class = j.value("size_class", j.value("class", std::string{}));
  try {
    a.validate();
  } catch (const Error& e) {
    bad(e.what());
  }
  return a;
}

std::vector<Annotation> annotations_from_json(const Json& j) {
  std::vector<Annotation> out;
  const Json* list = &j;
  if (j.is_object() && j.contains("annotations")) list = &j.at("annotations");
  if (list->is_array()) {
    for (const auto& a : *list) out.push_back(annotation_from_json(a));
  } else if (list->is_object() && list->contains("truth")) {
    out.push_back(annotation_from_json(list->at("truth")));
  } else {
    out.push_back(annotation_from_json(*list));
  }
  return out;
}

Json compartment_to_json(const std::string& id, const DetectResult& r) {
  const auto& c = r.compartment;
  Json edges = Json::array();
  for (const auto& e : c.edges) edges.push_back({vec_to_json(e.start()), vec_to_json(e.end())});
  Json timings = Json::object();
  for (const auto& t : r.timings) timings[t.stage] = t.seconds;
  timings["total"] = r.total_seconds();
  return versioned({{"id", id},
                    {"frame", "A"},
                    {"key_points", corners_to_json(c.key_points)},
                    {"dims", {{"length", c.dims.x()}, {"width", c.dims.y()}, {"height", c.dims.z()}}},
                    {"edges", edges},
                    {"diagnostics", {{"extension_m", c.extension},
                                     {"input_segments", c.input_segments},
                                     {"fused_segments", c.fused_segments},
                                     {"candidates", c.candidates},
                                     {"input_points", r.input_points},
                                     {"cropped_points", r.cropped_points},
                                     {"working_points", r.working_points},
                                     {"regions", r.segmentation.regions.size()},
                                     {"point_scale_m", r.point_scale}}},
                    {"timings_s", timings}});
}

Prediction prediction_from_json(const Json& j) {
  check_version(j);
  Prediction p;
  p.id = require(j, "id").get<std::string>();
  p.points = corners_from_json(require(j, "key_points"));
  if (j.contains("timings_s")) p.runtime_s = number_or(j.at("timings_s"), "total", 0.0);
  return p;
}

Json report_to_json(const EvalReport& report) {
  Json vehicles = Json::array();
  for (const auto& v : report.vehicles) {
    vehicles.push_back({{"id", v.id},
                        {"size_class", v.size_class},
                        {"add_m", v.add},
                        {"relative_error_pct", v.relative_error_pct},
                        {"pass_5", v.pass5},
                        {"pass_7", v.pass7},
                        {"pass_10", v.pass10},
                        {"runtime_s", v.runtime_s}});
  }
  Json summary = Json::object();
  for (const auto& [cls, s] : report.by_class) {
    summary[cls] = {{"count", s.count},       {"mean_pct", s.mean},     {"sd_pct", s.sd},
                    {"min_pct", s.min},       {"median_pct", s.median}, {"max_pct", s.max},
                    {"add_5", s.pass5},       {"add_7", s.pass7},       {"add_10", s.pass10},
                    {"mean_runtime_s", s.mean_runtime_s}};
  }
  return versioned({{"vehicles", vehicles},
                    {"summary", summary},
                    {"missing_annotation", report.missing_annotation},
                    {"missing_prediction", report.missing_prediction}});
}

}  // namespace truckloc
