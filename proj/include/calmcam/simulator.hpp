#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "calmcam/behavior.hpp"
#include "calmcam/geometry.hpp"
#include "calmcam/ingest.hpp"
#include "calmcam/polygon.hpp"

namespace calmcam::sim {

struct ConstantSpeed {
  double speed_mph = 0.0;
};

/// Cruise at `free_speed_mph`, brake at `decel_mps2` so the vehicle comes to
/// rest `stop_distance_m` along its path, wait `dwell_s`, then accelerate back
/// to the free speed at `accel_mps2`.
struct TrapezoidStop {
  double free_speed_mph = 0.0;
  double decel_mps2 = 0.0;
  double dwell_s = 0.0;
  double accel_mps2 = 0.0;
  double stop_distance_m = 0.0;
};

/// Speed knots (time s, speed mph), linearly interpolated; held constant
/// before the first and after the last knot.
struct PiecewiseLinear {
  std::vector<std::pair<double, double>> knots;
};

using SpeedProfile = std::variant<ConstantSpeed, TrapezoidStop, PiecewiseLinear>;

/// Throws ConfigError naming `path` plus the offending field.
void validate_profile(const SpeedProfile& profile, const std::string& path = "profile");

struct MotionState {
  double distance_m = 0.0;
  double speed_mps = 0.0;
};

/// Closed-form distance and speed `t` seconds after entry.
MotionState motion_at(const SpeedProfile& profile, double t);

struct ProfileSample {
  std::int64_t frame = 0;
  double distance_m = 0.0;
  double speed_mph = 0.0;
};

/// Samples frames 0..floor(duration * fps).
std::vector<ProfileSample> integrate_profile(const SpeedProfile& profile, double fps,
                                             double duration_s);

struct SyntheticVehicle {
  std::int64_t id = 0;
  double entry_time_s = 0.0;
  WorldPoint start;
  WorldPoint direction{1.0, 0.0};  // unit
  double path_length_m = 100.0;    // leaves the scene after this distance
  double bbox_width_px = 40.0;
  double bbox_height_px = 30.0;
  int class_id = 0;
  ClassLabel label = ClassLabel::Car;
  SpeedProfile profile = ConstantSpeed{25.0};
};

struct TruthRow {
  std::int64_t id = 0;
  std::int64_t frame = 0;
  WorldPoint position;
  double speed_mph = 0.0;
};

struct VehicleTruth {
  double mean_speed_mph = 0.0;  // over rendered frames
  std::optional<double> min_zone_speed_mph;
  std::optional<ManeuverClass> maneuver;  // unset when the vehicle never enters the zone
};

struct GroundTruth {
  std::vector<TruthRow> rows;  // sorted by frame, then id
  std::map<std::int64_t, VehicleTruth> vehicles;
};

struct RenderSettings {
  double fps = 10.0;
  double duration_s = 60.0;
  double noise_sigma_px = 0.0;
  std::uint64_t seed = 0;
  std::optional<Polygon> approach_zone;
  ManeuverThresholds thresholds;
};

struct RenderedScene {
  std::vector<Detection> detections;  // sorted by frame, then id
  GroundTruth truth;
};

/// Projects each vehicle's true ground position through `h_true`, adds
/// Gaussian pixel noise to the anchor, and places a box whose anchor_point is
/// exactly the noisy anchor. Deterministic for a fixed seed.
RenderedScene render_scene(std::span<const SyntheticVehicle> vehicles, const Homography& h_true,
                           const RenderSettings& settings);

/// `id,frame,world_x_m,world_y_m,speed_mph,maneuver` with a header line.
void write_ground_truth(std::ostream& out, const GroundTruth& truth);

/// Ideal pinhole camera above the road plane.
struct PinholeCamera {
  double focal_px = 1400.0;
  double cx = 960.0;
  double cy = 540.0;
  WorldPoint position;       // ground point below the camera
  double height_m = 10.0;
  double heading_deg = 90.0;  // optical axis azimuth, counter-clockwise from +x
  double pitch_deg = 15.0;    // below horizontal
};

/// Road plane (meters) to image (pixels) map of the camera.
Homography camera_homography(const PinholeCamera& camera);

}  // namespace calmcam::sim
