// Shared scenes, fleets and independent oracles for the unit and acceptance
// suites. Oracles here deliberately avoid the library code paths they check.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "calmcam/config.hpp"
#include "calmcam/geometry.hpp"
#include "calmcam/ingest.hpp"
#include "calmcam/kinematics.hpp"
#include "calmcam/pipeline.hpp"
#include "calmcam/simulator.hpp"

namespace calmcam::testkit {

// ---------------------------------------------------------------- scene ----

/// Pole-mounted camera 10 m up, looking north along a straight road.
inline sim::PinholeCamera road_camera() {
  sim::PinholeCamera c;
  c.focal_px = 1400.0;
  c.cx = 960.0;
  c.cy = 540.0;
  c.position = {0.0, 0.0};
  c.height_m = 10.0;
  c.heading_deg = 90.0;
  c.pitch_deg = 15.0;
  return c;
}

inline Homography road_homography() { return sim::camera_homography(road_camera()); }

inline constexpr double kRoadStartY = 15.0;
inline constexpr double kRoadLength = 75.0;
inline constexpr double kZoneNearY = 30.0;
inline constexpr double kZoneFarY = 45.0;

inline std::vector<WorldPoint> rectangle(double x0, double y0, double x1, double y1) {
  return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
}

inline Polygon world_polygon(const std::vector<WorldPoint>& pts) {
  std::vector<Point2> v;
  for (const auto& p : pts) v.push_back({p.x, p.y});
  return Polygon(v);
}

inline Polygon image_polygon(const Homography& h, const std::vector<WorldPoint>& pts) {
  std::vector<Point2> v;
  for (const auto& p : pts) {
    const ImagePoint q = world_to_image(h, p);
    v.push_back({q.u, q.v});
  }
  return Polygon(v);
}

inline std::vector<Correspondence> road_correspondences(const Homography& h) {
  std::vector<Correspondence> c;
  for (const WorldPoint w : {WorldPoint{-6, 15}, WorldPoint{6, 15}, WorldPoint{6, 90},
                             WorldPoint{-6, 90}, WorldPoint{0, 40}, WorldPoint{-3, 60}}) {
    c.push_back({w, world_to_image(h, w)});
  }
  return c;
}

inline ClassMap coco_class_map() {
  return {{0, ClassLabel::Pedestrian}, {1, ClassLabel::Bicycle}, {2, ClassLabel::Car},
          {3, ClassLabel::Motorcycle}, {5, ClassLabel::Bus},     {7, ClassLabel::Truck}};
}

inline nlohmann::json points_json(const std::vector<WorldPoint>& pts) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& p : pts) a.push_back({p.x, p.y});
  return a;
}

/// Scene config JSON for the road camera.
inline nlohmann::json road_scene_json(const std::string& location_id = "1") {
  const Homography h = road_homography();
  nlohmann::json corr = nlohmann::json::array();
  for (const auto& c : road_correspondences(h)) {
    corr.push_back({{"world", {c.world.x, c.world.y}}, {"image", {c.image.u, c.image.v}}});
  }
  nlohmann::json aoi = nlohmann::json::array();
  for (const auto& p : rectangle(-8, 12, 8, 95)) {
    const ImagePoint q = world_to_image(h, p);
    aoi.push_back({q.u, q.v});
  }
  return {{"location_id", location_id},
          {"name", "test road"},
          {"fps", 10.0},
          {"correspondences", corr},
          {"aoi_polygon", aoi},
          {"approach_zone", points_json(rectangle(-6, kZoneNearY, 6, kZoneFarY))},
          {"travel_direction", {0.0, 1.0}},
          {"class_map", {{"2", "car"}, {"5", "bus"}, {"7", "truck"}, {"1", "bicycle"}, {"0", "pedestrian"}}}};
}

inline SceneConfig road_scene(const std::string& location_id = "1") {
  return parse_scene_config(road_scene_json(location_id));
}

// ---------------------------------------------------------------- fleets ---

inline double traverse_time(const sim::SpeedProfile& p, double length) {
  double t = 0.0;
  while (sim::motion_at(p, t).distance_m <= length) t += 0.1;
  return t;
}

/// Vehicles enter one after another on the road centre line, each after the
/// previous one has left, so no two are ever on screen together.
inline std::vector<sim::SyntheticVehicle> sequential_fleet(const std::vector<sim::SpeedProfile>& profiles,
                                                           std::int64_t first_id = 1,
                                                           double first_entry = 0.0) {
  std::vector<sim::SyntheticVehicle> out;
  double entry = first_entry;
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    sim::SyntheticVehicle v;
    v.id = first_id + static_cast<std::int64_t>(i);
    v.entry_time_s = entry;
    v.start = {0.0, kRoadStartY};
    v.direction = {0.0, 1.0};
    v.path_length_m = kRoadLength;
    v.bbox_width_px = 80.0;
    v.bbox_height_px = 60.0;
    v.class_id = 2;
    v.label = ClassLabel::Car;
    v.profile = profiles[i];
    out.push_back(v);
    entry += traverse_time(profiles[i], kRoadLength) + 1.0;
  }
  return out;
}

inline double fleet_duration(const std::vector<sim::SyntheticVehicle>& fleet) {
  const auto& last = fleet.back();
  return last.entry_time_s + traverse_time(last.profile, last.path_length_m) + 1.0;
}

/// Slows from `free_mph` to `slow_mph`, holds it across the approach zone,
/// then resumes. Plateau spans road y in [kZoneNearY - 4, kZoneFarY + 4].
inline sim::PiecewiseLinear slow_down_profile(double free_mph, double slow_mph, double ramp_s = 2.0) {
  const double vf = free_mph / kMpsToMph;
  const double vs = slow_mph / kMpsToMph;
  const double plateau_start = (kZoneNearY - 4.0) - kRoadStartY;  // distance along path
  const double plateau_end = (kZoneFarY + 4.0) - kRoadStartY;
  // shorten the ramp when there is not enough road ahead of the plateau
  ramp_s = std::min(ramp_s, 1.8 * plateau_start / (vf + vs));
  const double ramp_dist = 0.5 * (vf + vs) * ramp_s;
  const double t1 = (plateau_start - ramp_dist) / vf;
  const double t2 = t1 + ramp_s;
  const double t3 = t2 + (plateau_end - plateau_start) / vs;
  return sim::PiecewiseLinear{{{t1, free_mph}, {t2, slow_mph}, {t3, slow_mph}, {t3 + ramp_s, free_mph}}};
}

/// Full stop in the middle of the approach zone.
inline sim::TrapezoidStop stop_profile(double free_mph, double dwell_s = 2.0) {
  return sim::TrapezoidStop{free_mph, 4.0, dwell_s, 2.0, 0.5 * (kZoneNearY + kZoneFarY) - kRoadStartY};
}

inline nlohmann::json profile_json(const sim::SpeedProfile& p) {
  if (const auto* c = std::get_if<sim::ConstantSpeed>(&p)) {
    return {{"type", "constant"}, {"speed_mph", c->speed_mph}};
  }
  if (const auto* t = std::get_if<sim::TrapezoidStop>(&p)) {
    return {{"type", "trapezoid_stop"},  {"free_speed_mph", t->free_speed_mph},
            {"decel_mps2", t->decel_mps2}, {"dwell_s", t->dwell_s},
            {"accel_mps2", t->accel_mps2}, {"stop_distance_m", t->stop_distance_m}};
  }
  nlohmann::json knots = nlohmann::json::array();
  for (const auto& [t, v] : std::get<sim::PiecewiseLinear>(p).knots) knots.push_back({t, v});
  return {{"type", "piecewise_linear"}, {"knots", knots}};
}

/// Simulation config for the road camera.
inline nlohmann::json sim_config_json(const std::vector<sim::SyntheticVehicle>& fleet, double sigma_px) {
  const sim::PinholeCamera c = road_camera();
  nlohmann::json vehicles = nlohmann::json::array();
  for (const auto& v : fleet) {
    vehicles.push_back({{"id", v.id},
                        {"entry_time_s", v.entry_time_s},
                        {"start", {v.start.x, v.start.y}},
                        {"direction", {v.direction.x, v.direction.y}},
                        {"path_length_m", v.path_length_m},
                        {"bbox", {v.bbox_width_px, v.bbox_height_px}},
                        {"class", std::string(to_string(v.label))},
                        {"class_id", v.class_id},
                        {"profile", profile_json(v.profile)}});
  }
  return {{"fps", 10.0},
          {"duration_s", fleet_duration(fleet)},
          {"noise_sigma_px", sigma_px},
          {"camera",
           {{"focal_px", c.focal_px}, {"cx", c.cx}, {"cy", c.cy}, {"position", {c.position.x, c.position.y}},
            {"height_m", c.height_m}, {"heading_deg", c.heading_deg}, {"pitch_deg", c.pitch_deg}}},
          {"approach_zone", points_json(rectangle(-6, kZoneNearY, 6, kZoneFarY))},
          {"vehicles", vehicles}};
}

// -------------------------------------------------------------- pipeline ---

inline std::string detections_csv(const std::vector<Detection>& d) {
  std::ostringstream out;
  write_track_file(out, d);
  return out.str();
}

/// Parse -> assemble -> cascade -> kinematics -> behavior for one CSV blob.
inline PhaseResult run_pipeline(const std::string& csv, const SceneConfig& scene) {
  const Homography h = solve_homography(scene.correspondences);
  std::istringstream in(csv);
  PhaseResult result;
  const auto det = parse_track_file(in, scene.class_map);
  result.accounting.raw_detections = det.size();
  process_tracks(assemble_tracks(det), 0, scene, h, result);
  return result;
}

// --------------------------------------------------------------- oracles ---

/// Full sort then linear interpolation at rank 0.85 * (n - 1).
inline double oracle_p85(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const double rank = 0.85 * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const auto hi = static_cast<std::size_t>(std::ceil(rank));
  return v[lo] + (rank - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

/// Winding-number containment for points well away from the boundary.
inline bool oracle_inside(const std::vector<Point2>& poly, Point2 p) {
  int winding = 0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point2 a = poly[i];
    const Point2 b = poly[(i + 1) % poly.size()];
    const double side = (b.x - a.x) * (p.y - a.y) - (p.x - a.x) * (b.y - a.y);
    if (a.y <= p.y) {
      if (b.y > p.y && side > 0) ++winding;
    } else if (b.y <= p.y && side < 0) {
      --winding;
    }
  }
  return winding != 0;
}

/// Longest all-true index range by checking every [i, j] window.
inline std::pair<std::size_t, std::size_t> oracle_longest_run(const std::vector<bool>& inside) {
  std::size_t best_i = 0, best_len = 0;
  for (std::size_t i = 0; i < inside.size(); ++i) {
    for (std::size_t j = i; j < inside.size(); ++j) {
      bool all = true;
      for (std::size_t k = i; k <= j; ++k) all = all && inside[k];
      if (all && j - i + 1 > best_len) {
        best_len = j - i + 1;
        best_i = i;
      }
    }
  }
  return {best_i, best_len};
}

// ---------------------------------------------------------------- misc -----

inline Detection make_detection(std::int64_t frame, std::int64_t id, ImagePoint anchor,
                                ClassLabel label = ClassLabel::Car, double conf = 0.9,
                                double w = 40.0, double h = 30.0) {
  Detection d;
  d.frame = frame;
  d.track_id = id;
  d.bbox = {anchor.u - w / 2.0, anchor.v - h, w, h};
  d.confidence = conf;
  d.class_id = label == ClassLabel::Car ? 2 : 0;
  d.label = label;
  return d;
}

inline Track make_track(std::int64_t id, const std::vector<ImagePoint>& anchors,
                        std::int64_t first_frame = 0, ClassLabel label = ClassLabel::Car) {
  std::vector<Detection> d;
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    d.push_back(make_detection(first_frame + static_cast<std::int64_t>(i), id, anchors[i], label));
  }
  return assemble_tracks(d).front();
}

/// Random tracks on the road camera: mixed labels, headings and speeds, some
/// parked, some tailgating another track, some wandering out of the AoI.
inline std::vector<Track> random_scene(std::mt19937_64& rng, const Homography& h) {
  std::uniform_int_distribution<int> n_tracks(5, 25), len(3, 60), start_frame(0, 100), kind(0, 9);
  std::uniform_real_distribution<double> x(-10, 10), y(10, 100), heading(0, 2 * M_PI), speed(0, 20),
      unit(0, 1);
  const ClassLabel labels[] = {ClassLabel::Car, ClassLabel::Truck, ClassLabel::Bus,
                               ClassLabel::Bicycle, ClassLabel::Pedestrian, ClassLabel::Other};
  std::vector<Detection> det;
  const int n = n_tracks(rng);
  std::vector<std::vector<WorldPoint>> paths;
  std::vector<std::int64_t> starts;
  for (int id = 1; id <= n; ++id) {
    const int k = kind(rng);
    std::vector<WorldPoint> path;
    std::int64_t f0 = start_frame(rng);
    const int l = len(rng);
    if (k == 0 && !paths.empty()) {
      // tailgate an earlier track two meters behind it
      const auto& lead = paths.back();
      f0 = starts.back();
      for (std::size_t i = 0; i < lead.size(); ++i) path.push_back({lead[i].x, lead[i].y - 2.0});
    } else {
      const WorldPoint p0{x(rng), y(rng)};
      const double a = k <= 5 ? M_PI / 2 + 0.3 * (unit(rng) - 0.5) : heading(rng);
      const double v = k == 1 ? 0.0 : speed(rng) / 10.0;  // m per frame
      for (int i = 0; i < l; ++i) {
        path.push_back({p0.x + std::cos(a) * v * i + 0.05 * (unit(rng) - 0.5),
                        p0.y + std::sin(a) * v * i + 0.05 * (unit(rng) - 0.5)});
      }
    }
    paths.push_back(path);
    starts.push_back(f0);
    const ClassLabel main = labels[std::uniform_int_distribution<int>(0, 5)(rng)];
    for (std::size_t i = 0; i < path.size(); ++i) {
      if (path[i].y < 3.0) continue;  // behind the camera's useful range
      const ClassLabel lbl = unit(rng) < 0.8 ? main : labels[std::uniform_int_distribution<int>(0, 5)(rng)];
      det.push_back(make_detection(f0 + static_cast<std::int64_t>(i), id, world_to_image(h, path[i]),
                                   lbl, 0.5 + 0.5 * unit(rng), 40.0, 30.0));
    }
  }
  return assemble_tracks(det);
}

/// Temporary directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() /
            ("calmcam_" + tag + "_" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace calmcam::testkit
