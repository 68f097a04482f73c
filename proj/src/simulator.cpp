#include "calmcam/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>

#include <Eigen/Dense>

#include "calmcam/errors.hpp"
#include "calmcam/format.hpp"
#include "calmcam/kinematics.hpp"

namespace calmcam::sim {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Rendered pixel values live on a 2^-20 grid so that box arithmetic is exact.
constexpr int kGridBits = 20;

double quantize(double x, int bits = kGridBits) {
  return std::ldexp(std::round(std::ldexp(x, bits)), -bits);
}

double mph_to_mps(double mph) { return mph / kMpsToMph; }

// Uniform acceleration over [start, start + length).
struct Segment {
  double start = 0.0;
  double length = kInf;
  double speed = 0.0;  // m/s at segment start
  double accel = 0.0;
};

std::vector<Segment> compile(const ConstantSpeed& p) {
  return {{0.0, kInf, mph_to_mps(p.speed_mph), 0.0}};
}

std::vector<Segment> compile(const TrapezoidStop& p) {
  const double v = mph_to_mps(p.free_speed_mph);
  const double brake_time = v / p.decel_mps2;
  const double brake_distance = v * brake_time / 2.0;
  const double cruise_time = (p.stop_distance_m - brake_distance) / v;
  const double accel_time = v / p.accel_mps2;

  std::vector<Segment> segs;
  double t = 0.0;
  segs.push_back({t, cruise_time, v, 0.0});
  t += cruise_time;
  segs.push_back({t, brake_time, v, -p.decel_mps2});
  t += brake_time;
  segs.push_back({t, p.dwell_s, 0.0, 0.0});
  t += p.dwell_s;
  segs.push_back({t, accel_time, 0.0, p.accel_mps2});
  t += accel_time;
  segs.push_back({t, kInf, v, 0.0});
  return segs;
}

std::vector<Segment> compile(const PiecewiseLinear& p) {
  const auto& k = p.knots;
  std::vector<Segment> segs;
  if (k.front().first > 0.0) segs.push_back({0.0, k.front().first, mph_to_mps(k.front().second), 0.0});
  for (std::size_t i = 0; i + 1 < k.size(); ++i) {
    const double dt = k[i + 1].first - k[i].first;
    const double v0 = mph_to_mps(k[i].second);
    const double v1 = mph_to_mps(k[i + 1].second);
    segs.push_back({k[i].first, dt, v0, (v1 - v0) / dt});
  }
  segs.push_back({k.back().first, kInf, mph_to_mps(k.back().second), 0.0});
  return segs;
}

std::vector<Segment> compile(const SpeedProfile& profile) {
  return std::visit([](const auto& p) { return compile(p); }, profile);
}

MotionState evaluate(const std::vector<Segment>& segs, double t) {
  if (t <= 0.0) return {0.0, segs.front().speed};
  double distance = 0.0;
  for (const Segment& s : segs) {
    const double local = t - s.start;
    if (local <= s.length) {
      return {distance + s.speed * local + 0.5 * s.accel * local * local,
              s.speed + s.accel * local};
    }
    distance += s.speed * s.length + 0.5 * s.accel * s.length * s.length;
  }
  return {distance, segs.back().speed};
}

void require(bool ok, const std::string& path, const std::string& reason) {
  if (!ok) throw ConfigError(path, reason);
}

bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }
bool finite_pos(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

void validate_profile(const SpeedProfile& profile, const std::string& path) {
  if (const auto* c = std::get_if<ConstantSpeed>(&profile)) {
    require(finite_nonneg(c->speed_mph), path + ".speed_mph", "must be finite and >= 0");
  } else if (const auto* t = std::get_if<TrapezoidStop>(&profile)) {
    require(finite_pos(t->free_speed_mph), path + ".free_speed_mph", "must be > 0");
    require(finite_pos(t->decel_mps2), path + ".decel_mps2", "must be > 0");
    require(finite_pos(t->accel_mps2), path + ".accel_mps2", "must be > 0");
    require(finite_nonneg(t->dwell_s), path + ".dwell_s", "must be >= 0");
    const double v = mph_to_mps(t->free_speed_mph);
    require(std::isfinite(t->stop_distance_m) && t->stop_distance_m >= v * v / (2.0 * t->decel_mps2),
            path + ".stop_distance_m", "shorter than the braking distance");
  } else {
    const auto& knots = std::get<PiecewiseLinear>(profile).knots;
    require(!knots.empty(), path + ".knots", "needs at least one knot");
    for (std::size_t i = 0; i < knots.size(); ++i) {
      const std::string knot = path + ".knots[" + std::to_string(i) + "]";
      require(finite_nonneg(knots[i].first), knot + ".time_s", "must be finite and >= 0");
      require(finite_nonneg(knots[i].second), knot + ".speed_mph", "must be finite and >= 0");
      if (i > 0) {
        require(knots[i].first > knots[i - 1].first, knot + ".time_s", "times must strictly increase");
      }
    }
  }
}

MotionState motion_at(const SpeedProfile& profile, double t) {
  validate_profile(profile);
  return evaluate(compile(profile), t);
}

std::vector<ProfileSample> integrate_profile(const SpeedProfile& profile, double fps,
                                             double duration_s) {
  if (!finite_pos(fps)) throw ConfigError("fps", "must be positive");
  if (!finite_pos(duration_s)) throw ConfigError("duration_s", "must be positive");
  validate_profile(profile);
  const auto segs = compile(profile);
  const auto last = static_cast<std::int64_t>(std::floor(duration_s * fps + 1e-9));
  std::vector<ProfileSample> out;
  out.reserve(static_cast<std::size_t>(last + 1));
  for (std::int64_t k = 0; k <= last; ++k) {
    const MotionState m = evaluate(segs, static_cast<double>(k) / fps);
    out.push_back({k, m.distance_m, m.speed_mps * kMpsToMph});
  }
  return out;
}

RenderedScene render_scene(std::span<const SyntheticVehicle> vehicles, const Homography& h_true,
                           const RenderSettings& settings) {
  if (!finite_pos(settings.fps)) throw ConfigError("fps", "must be positive");
  if (!finite_pos(settings.duration_s)) throw ConfigError("duration_s", "must be positive");
  if (!finite_nonneg(settings.noise_sigma_px)) throw ConfigError("noise_sigma_px", "must be >= 0");

  std::mt19937_64 rng(settings.seed);
  std::normal_distribution<double> noise(0.0, settings.noise_sigma_px > 0.0 ? settings.noise_sigma_px : 1.0);
  const double fps = settings.fps;
  const auto last_frame = static_cast<std::int64_t>(std::floor(settings.duration_s * fps + 1e-9));

  RenderedScene scene;
  for (std::size_t vi = 0; vi < vehicles.size(); ++vi) {
    const SyntheticVehicle& v = vehicles[vi];
    const std::string path = "vehicles[" + std::to_string(vi) + "]";
    validate_profile(v.profile, path + ".profile");
    if (std::abs(std::hypot(v.direction.x, v.direction.y) - 1.0) > 1e-9) {
      throw ConfigError(path + ".direction", "must be a unit vector");
    }
    if (!finite_pos(v.bbox_width_px) || !finite_pos(v.bbox_height_px)) {
      throw ConfigError(path + ".bbox", "width and height must be positive");
    }
    const auto segs = compile(v.profile);
    const double width = quantize(v.bbox_width_px, kGridBits - 1);
    const double height = quantize(v.bbox_height_px);

    VehicleTruth truth;
    double speed_sum = 0.0;
    std::size_t rendered = 0;
    const auto first_frame = static_cast<std::int64_t>(std::ceil(v.entry_time_s * fps - 1e-9));
    for (std::int64_t k = std::max<std::int64_t>(first_frame, 0); k <= last_frame; ++k) {
      const MotionState m = evaluate(segs, static_cast<double>(k) / fps - v.entry_time_s);
      if (m.distance_m > v.path_length_m) break;
      const WorldPoint world{v.start.x + v.direction.x * m.distance_m,
                             v.start.y + v.direction.y * m.distance_m};
      ImagePoint anchor;
      try {
        anchor = world_to_image(h_true, world);
      } catch (const AtInfinity& e) {
        throw AtInfinity("vehicle " + std::to_string(v.id) + " at frame " + std::to_string(k) +
                         ": " + e.what());
      }
      if (settings.noise_sigma_px > 0.0) {
        anchor.u += noise(rng);
        anchor.v += noise(rng);
      }
      anchor = {quantize(anchor.u), quantize(anchor.v)};

      Detection d;
      d.frame = k;
      d.track_id = v.id;
      d.bbox = {anchor.u - width / 2.0, anchor.v - height, width, height};
      d.confidence = 0.9;
      d.class_id = v.class_id;
      d.label = v.label;
      scene.detections.push_back(d);

      const double speed_mph = m.speed_mps * kMpsToMph;
      scene.truth.rows.push_back({v.id, k, world, speed_mph});
      speed_sum += speed_mph;
      ++rendered;
      if (settings.approach_zone && settings.approach_zone->contains({world.x, world.y})) {
        truth.min_zone_speed_mph = std::min(truth.min_zone_speed_mph.value_or(kInf), speed_mph);
      }
    }
    if (rendered == 0) continue;
    truth.mean_speed_mph = speed_sum / static_cast<double>(rendered);
    if (truth.min_zone_speed_mph) {
      truth.maneuver = classify_maneuver(*truth.min_zone_speed_mph, settings.thresholds);
    }
    scene.truth.vehicles[v.id] = truth;
  }

  std::stable_sort(scene.detections.begin(), scene.detections.end(),
                   [](const Detection& a, const Detection& b) {
                     return a.frame != b.frame ? a.frame < b.frame : a.track_id < b.track_id;
                   });
  std::stable_sort(scene.truth.rows.begin(), scene.truth.rows.end(),
                   [](const TruthRow& a, const TruthRow& b) {
                     return a.frame != b.frame ? a.frame < b.frame : a.id < b.id;
                   });
  return scene;
}

void write_ground_truth(std::ostream& out, const GroundTruth& truth) {
  out << "id,frame,world_x_m,world_y_m,speed_mph,maneuver\n";
  for (const auto& r : truth.rows) {
    const auto it = truth.vehicles.find(r.id);
    const std::string_view maneuver =
        it != truth.vehicles.end() && it->second.maneuver ? to_string(*it->second.maneuver)
                                                          : std::string_view("none");
    out << r.id << ',' << r.frame << ',' << format_number(r.position.x) << ','
        << format_number(r.position.y) << ',' << format_number(r.speed_mph) << ',' << maneuver
        << '\n';
  }
}

Homography camera_homography(const PinholeCamera& camera) {
  const double heading = camera.heading_deg * std::numbers::pi / 180.0;
  const double pitch = camera.pitch_deg * std::numbers::pi / 180.0;
  const Eigen::Vector3d forward(std::cos(pitch) * std::cos(heading),
                                std::cos(pitch) * std::sin(heading), -std::sin(pitch));
  const Eigen::Vector3d right(std::sin(heading), -std::cos(heading), 0.0);
  const Eigen::Vector3d down = forward.cross(right);

  Eigen::Matrix3d rotation;
  rotation.row(0) = right.transpose();
  rotation.row(1) = down.transpose();
  rotation.row(2) = forward.transpose();
  const Eigen::Vector3d center(camera.position.x, camera.position.y, camera.height_m);

  Eigen::Matrix3d k;
  k << camera.focal_px, 0.0, camera.cx, 0.0, camera.focal_px, camera.cy, 0.0, 0.0, 1.0;
  Eigen::Matrix3d extrinsic;
  extrinsic.col(0) = rotation.col(0);
  extrinsic.col(1) = rotation.col(1);
  extrinsic.col(2) = -rotation * center;
  return Homography(k * extrinsic);
}

}  // namespace calmcam::sim
