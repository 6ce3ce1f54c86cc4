#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "truckloc/calibration.hpp"
#include "truckloc/metrics.hpp"
#include "truckloc/pipeline.hpp"
#include "truckloc/scene.hpp"
#include "truckloc/synthetic_scenes.hpp"
#include "truckloc/world_frame.hpp"

namespace truckloc {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Parsed JSON file; Error(kIo) if unreadable, Error(kParse) if malformed.
Json load_json(const std::filesystem::path& path);
void save_json(const std::filesystem::path& path, const Json& doc);

Json vec_to_json(const Vec3& v);
Vec3 vec_from_json(const Json& j);

// Angles are degrees in these documents; lengths stay in meters.
Json sensor_to_json(const SensorConfig& cfg);
SensorConfig sensor_from_json(const Json& j, SensorConfig defaults = {});
Json extrinsics_to_json(const Extrinsics& e);
Extrinsics extrinsics_from_json(const Json& j);

Json calibration_to_json(const CalibrationResult& r);
/// Accepts a calibration result document or a bare extrinsics object.
Extrinsics extrinsics_from_document(const Json& j);

std::vector<PlaneDataset> plane_datasets_from_json(const Json& j);
Json plane_datasets_to_json(const std::vector<PlaneDataset>& datasets);
/// CSV rows: plane_id,range_m,azimuth_rad,platform_rad (header optional).
std::vector<PlaneDataset> plane_datasets_from_csv(const std::filesystem::path& path);

/// Scene document: primitives plus an optional sensor placement. With a placement
/// the primitives are in a z-up world frame; without, in the platform frame.
struct SceneDocument {
  SceneModel scene;
  std::optional<SensorPlacement> sensor;

  SceneModel platform_scene() const;
};
Json scene_to_json(const SceneDocument& doc);
SceneDocument scene_from_json(const Json& j);

Json parking_setup_to_json(const ParkingSetupConfig& cfg);
ParkingSetupConfig parking_setup_from_json(const Json& j);

Json world_frame_to_json(const WorldFrame& wf);
WorldFrame world_frame_from_json(const Json& j);

Json detect_config_to_json(const DetectConfig& cfg);
DetectConfig detect_config_from_json(const Json& j, DetectConfig defaults = {});

/// Top-level run configuration (all sections optional).
struct PipelineConfig {
  SensorConfig sensor;
  Extrinsics extrinsics;
  std::optional<ParkingSetupConfig> parking;
  DetectConfig detect;
};
PipelineConfig pipeline_config_from_json(const Json& j, const std::filesystem::path& base_dir = {});
Json pipeline_config_to_json(const PipelineConfig& cfg);

Json annotation_to_json(const Annotation& a);
Annotation annotation_from_json(const Json& j);
/// Accepts a single annotation, an array, or {"annotations": [...]}.
std::vector<Annotation> annotations_from_json(const Json& j);

Json compartment_to_json(const std::string& id, const DetectResult& r);
Prediction prediction_from_json(const Json& j);

Json report_to_json(const EvalReport& report);

}  // namespace truckloc
