#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "calmcam/analytics.hpp"
#include "calmcam/behavior.hpp"
#include "calmcam/geometry.hpp"
#include "calmcam/ingest.hpp"
#include "calmcam/simulator.hpp"

namespace calmcam {

struct Thresholds {
  double stationary_m = 2.0;
  double following_px = 40.0;
  double following_frac = 0.5;
  double direction_deg = 45.0;
  double stopgo_mph = 5.0;
  double slowdown_mph = 10.0;
  double min_track_s = 0.5;

  FilterThresholds filters() const {
    return {stationary_m, following_px, following_frac, direction_deg};
  }
  ManeuverThresholds maneuvers() const { return {stopgo_mph, slowdown_mph}; }
};

/// Rectangle reaching `depth_m` upstream (against `travel_direction`) from the
/// crosswalk line a-b.
Polygon approach_zone_from_crosswalk(WorldPoint a, WorldPoint b, WorldPoint travel_direction,
                                     double depth_m = 15.0);

struct SceneConfig {
  std::string location_id;
  std::string name;
  double fps;
  std::vector<Correspondence> correspondences;
  Polygon aoi_polygon;
  Polygon approach_zone;
  WorldPoint travel_direction;
  ClassMap class_map;
  Thresholds thresholds;
  PercentileMethod percentile_method = PercentileMethod::Interpolate;
  Representative representative = Representative::PerVehicle;
  ApproachReduction v_mean_reduction = ApproachReduction::Min;
  double calibration_gate_px = 2.0;
  double histogram_bin_mph = 1.0;
  bool signalized = false;

  SceneGeometry geometry() const {
    return {fps, aoi_polygon, approach_zone, travel_direction, class_map};
  }
};

SceneConfig parse_scene_config(const nlohmann::json& j);
SceneConfig load_scene_config(const std::filesystem::path& path);

struct ManifestInput {
  std::filesystem::path path;
  double hours = 0.0;
};

struct ManifestPhase {
  Phase phase = Phase::Pre;
  std::vector<ManifestInput> inputs;
  double hours() const;
};

struct RunManifest {
  std::filesystem::path scene_path;
  std::vector<ManifestPhase> phases;
};

/// Relative paths resolve against `base_dir`.
RunManifest parse_manifest(const nlohmann::json& j, const std::filesystem::path& base_dir);
RunManifest load_manifest(const std::filesystem::path& path);

struct SimConfig {
  sim::RenderSettings render;
  Homography homography;
  std::vector<sim::SyntheticVehicle> vehicles;
};

SimConfig parse_sim_config(const nlohmann::json& j);
SimConfig load_sim_config(const std::filesystem::path& path);

nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace calmcam
