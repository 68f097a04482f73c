#include "calmcam/config.hpp"

#include <cmath>
#include <fstream>

#include "calmcam/errors.hpp"

namespace calmcam {
namespace {

using nlohmann::json;

// YOLO/COCO ids for the road-user classes.
ClassMap default_class_map() {
  return {{0, ClassLabel::Pedestrian}, {1, ClassLabel::Bicycle}, {2, ClassLabel::Car},
          {3, ClassLabel::Motorcycle}, {5, ClassLabel::Bus},     {7, ClassLabel::Truck}};
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string index(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

const json& require_field(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw ConfigError(join(path, key), "missing");
  return *it;
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path, "must be finite");
  return v;
}

double number_or(const json& j, const std::string& key, const std::string& path, double fallback) {
  const auto it = j.find(key);
  return it == j.end() ? fallback : as_number(*it, join(path, key));
}

double positive(double v, const std::string& path) {
  if (!(v > 0.0)) throw ConfigError(path, "must be positive");
  return v;
}

std::string as_string(const json& j, const std::string& path) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_integer()) return std::to_string(j.get<long long>());
  throw ConfigError(path, "expected a string");
}

std::pair<double, double> as_pair(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(path, "expected [x, y]");
  return {as_number(j[0], index(path, 0)), as_number(j[1], index(path, 1))};
}

WorldPoint as_world(const json& j, const std::string& path) {
  const auto [x, y] = as_pair(j, path);
  return {x, y};
}

Polygon as_polygon(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected a list of [x, y] vertices");
  std::vector<Point2> pts;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto [x, y] = as_pair(j[i], index(path, i));
    pts.push_back({x, y});
  }
  try {
    return Polygon(std::move(pts));
  } catch (const ConfigError& e) {
    throw ConfigError(path, e.what());
  }
}

WorldPoint unit_direction(const json& j, const std::string& path) {
  const WorldPoint d = as_world(j, path);
  const double n = std::hypot(d.x, d.y);
  if (!(n > 0.0)) throw ConfigError(path, "must be a nonzero vector");
  return {d.x / n, d.y / n};
}

ClassMap as_class_map(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected {\"<class id>\": \"<label>\"}");
  ClassMap map;
  for (const auto& [key, value] : j.items()) {
    const std::string field = join(path, key);
    int id = 0;
    try {
      std::size_t used = 0;
      id = std::stoi(key, &used);
      if (used != key.size()) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      throw ConfigError(field, "class id must be an integer");
    }
    const auto label = parse_class_label(as_string(value, field));
    if (!label) throw ConfigError(field, "unknown class label");
    map[id] = *label;
  }
  return map;
}

std::vector<Correspondence> as_correspondences(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected a list of {world, image}");
  std::vector<Correspondence> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = index(path, i);
    const WorldPoint w = as_world(require_field(j[i], "world", p), join(p, "world"));
    const auto [u, v] = as_pair(require_field(j[i], "image", p), join(p, "image"));
    out.push_back({w, {u, v}});
  }
  return out;
}

template <typename Enum>
Enum enum_field(const json& j, const std::string& key, const std::string& path, Enum fallback,
                std::initializer_list<std::pair<const char*, Enum>> options) {
  const auto it = j.find(key);
  if (it == j.end()) return fallback;
  const std::string field = join(path, key);
  const std::string value = as_string(*it, field);
  std::string allowed;
  for (const auto& [name, e] : options) {
    if (value == name) return e;
    allowed += allowed.empty() ? name : std::string(" | ") + name;
  }
  throw ConfigError(field, "expected one of " + allowed);
}

Thresholds parse_thresholds(const json& j, const std::string& path) {
  Thresholds t;
  if (j.is_null()) return t;
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  auto get = [&](const char* key, double fallback) {
    return positive(number_or(j, key, path, fallback), join(path, key));
  };
  t.stationary_m = get("stationary_m", t.stationary_m);
  t.following_px = get("following_px", t.following_px);
  t.following_frac = get("following_frac", t.following_frac);
  t.direction_deg = get("direction_deg", t.direction_deg);
  t.stopgo_mph = get("stopgo_mph", t.stopgo_mph);
  t.slowdown_mph = get("slowdown_mph", t.slowdown_mph);
  t.min_track_s = get("min_track_s", t.min_track_s);
  if (t.following_frac > 1.0) throw ConfigError(join(path, "following_frac"), "must be <= 1");
  if (t.direction_deg > 180.0) throw ConfigError(join(path, "direction_deg"), "must be <= 180");
  if (t.stopgo_mph >= t.slowdown_mph) {
    throw ConfigError(join(path, "stopgo_mph"), "must be below slowdown_mph");
  }
  return t;
}

sim::SpeedProfile parse_profile(const json& j, const std::string& path) {
  const std::string type = as_string(require_field(j, "type", path), join(path, "type"));
  auto num = [&](const char* key) {
    return as_number(require_field(j, key, path), join(path, key));
  };
  sim::SpeedProfile profile;
  if (type == "constant") {
    profile = sim::ConstantSpeed{num("speed_mph")};
  } else if (type == "trapezoid_stop") {
    profile = sim::TrapezoidStop{num("free_speed_mph"), num("decel_mps2"), num("dwell_s"),
                                 num("accel_mps2"), num("stop_distance_m")};
  } else if (type == "piecewise_linear") {
    const std::string kpath = join(path, "knots");
    const json& knots = require_field(j, "knots", path);
    if (!knots.is_array()) throw ConfigError(kpath, "expected a list of [time_s, speed_mph]");
    sim::PiecewiseLinear p;
    for (std::size_t i = 0; i < knots.size(); ++i) p.knots.push_back(as_pair(knots[i], index(kpath, i)));
    profile = std::move(p);
  } else {
    throw ConfigError(join(path, "type"), "expected constant | trapezoid_stop | piecewise_linear");
  }
  sim::validate_profile(profile, path);
  return profile;
}

Homography parse_sim_homography(const json& j) {
  if (const auto it = j.find("camera"); it != j.end()) {
    const std::string path = "camera";
    sim::PinholeCamera c;
    c.focal_px = positive(number_or(*it, "focal_px", path, c.focal_px), join(path, "focal_px"));
    c.cx = number_or(*it, "cx", path, c.cx);
    c.cy = number_or(*it, "cy", path, c.cy);
    if (const auto pos = it->find("position"); pos != it->end()) c.position = as_world(*pos, join(path, "position"));
    c.height_m = positive(number_or(*it, "height_m", path, c.height_m), join(path, "height_m"));
    c.heading_deg = number_or(*it, "heading_deg", path, c.heading_deg);
    c.pitch_deg = number_or(*it, "pitch_deg", path, c.pitch_deg);
    return sim::camera_homography(c);
  }
  if (const auto it = j.find("homography"); it != j.end()) {
    if (!it->is_array() || it->size() != 9) throw ConfigError("homography", "expected 9 numbers");
    std::array<double, 9> h{};
    for (std::size_t i = 0; i < 9; ++i) h[i] = as_number((*it)[i], index("homography", i));
    try {
      return Homography::from_entries(h);
    } catch (const DegenerateConfiguration& e) {
      throw ConfigError("homography", e.what());
    }
  }
  if (const auto it = j.find("correspondences"); it != j.end()) {
    return solve_homography(as_correspondences(*it, "correspondences"));
  }
  throw ConfigError("camera", "one of camera | homography | correspondences is required");
}

}  // namespace

Polygon approach_zone_from_crosswalk(WorldPoint a, WorldPoint b, WorldPoint travel_direction,
                                     double depth_m) {
  const WorldPoint back{-travel_direction.x * depth_m, -travel_direction.y * depth_m};
  return Polygon({{a.x, a.y}, {b.x, b.y}, {b.x + back.x, b.y + back.y}, {a.x + back.x, a.y + back.y}});
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string(), e.what());
  }
}

SceneConfig parse_scene_config(const json& j) {
  const WorldPoint travel = unit_direction(require_field(j, "travel_direction", ""), "travel_direction");

  std::optional<Polygon> zone;
  if (const auto it = j.find("approach_zone"); it != j.end()) {
    zone = as_polygon(*it, "approach_zone");
  } else if (const auto cw = j.find("crosswalk_line"); cw != j.end()) {
    if (!cw->is_array() || cw->size() != 2) throw ConfigError("crosswalk_line", "expected two points");
    const WorldPoint a = as_world((*cw)[0], "crosswalk_line[0]");
    const WorldPoint b = as_world((*cw)[1], "crosswalk_line[1]");
    const double depth = positive(number_or(j, "approach_depth_m", "", 15.0), "approach_depth_m");
    try {
      zone = approach_zone_from_crosswalk(a, b, travel, depth);
    } catch (const ConfigError& e) {
      throw ConfigError("crosswalk_line", e.what());
    }
  } else {
    throw ConfigError("approach_zone", "missing (give approach_zone or crosswalk_line)");
  }

  const auto cm = j.find("class_map");
  SceneConfig c{
      .location_id = as_string(require_field(j, "location_id", ""), "location_id"),
      .name = j.contains("name") ? as_string(j["name"], "name") : std::string(),
      .fps = positive(as_number(require_field(j, "fps", ""), "fps"), "fps"),
      .correspondences = as_correspondences(require_field(j, "correspondences", ""), "correspondences"),
      .aoi_polygon = as_polygon(require_field(j, "aoi_polygon", ""), "aoi_polygon"),
      .approach_zone = *zone,
      .travel_direction = travel,
      .class_map = cm == j.end() ? default_class_map() : as_class_map(*cm, "class_map"),
      .thresholds = parse_thresholds(j.value("thresholds", json()), "thresholds"),
  };
  c.percentile_method = enum_field(j, "percentile_method", "", PercentileMethod::Interpolate,
                                   {{"interpolate", PercentileMethod::Interpolate},
                                    {"nearest_rank", PercentileMethod::NearestRank}});
  c.representative = enum_field(j, "representative", "", Representative::PerVehicle,
                                {{"per_vehicle", Representative::PerVehicle},
                                 {"per_sample", Representative::PerSample}});
  c.v_mean_reduction = enum_field(j, "v_mean_reduction", "", ApproachReduction::Min,
                                  {{"min", ApproachReduction::Min}, {"mean", ApproachReduction::Mean}});
  c.calibration_gate_px = positive(number_or(j, "calibration_gate_px", "", 2.0), "calibration_gate_px");
  c.histogram_bin_mph = positive(number_or(j, "histogram_bin_mph", "", 1.0), "histogram_bin_mph");
  c.signalized = enum_field(j, "intersection_type", "", false,
                            {{"unsignalized", false}, {"signalized", true}});
  return c;
}

SceneConfig load_scene_config(const std::filesystem::path& path) {
  return parse_scene_config(read_json_file(path));
}

double ManifestPhase::hours() const {
  double h = 0.0;
  for (const auto& in : inputs) h += in.hours;
  return h;
}

RunManifest parse_manifest(const json& j, const std::filesystem::path& base_dir) {
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };
  RunManifest m;
  m.scene_path = resolve(as_string(require_field(j, "scene", ""), "scene"));
  const json& phases = require_field(j, "phases", "");
  if (!phases.is_array() || phases.empty()) throw ConfigError("phases", "expected a non-empty list");
  for (std::size_t i = 0; i < phases.size(); ++i) {
    const std::string path = index("phases", i);
    ManifestPhase phase;
    const std::string name = as_string(require_field(phases[i], "phase", path), join(path, "phase"));
    const auto parsed = parse_phase(name);
    if (!parsed) throw ConfigError(join(path, "phase"), "expected pre | post_w1 | post_w2");
    phase.phase = *parsed;
    for (const auto& other : m.phases) {
      if (other.phase == phase.phase) throw ConfigError(join(path, "phase"), "listed twice");
    }
    const json& inputs = require_field(phases[i], "inputs", path);
    if (!inputs.is_array()) throw ConfigError(join(path, "inputs"), "expected a list");
    for (std::size_t k = 0; k < inputs.size(); ++k) {
      const std::string ipath = index(join(path, "inputs"), k);
      ManifestInput in;
      in.path = resolve(as_string(require_field(inputs[k], "path", ipath), join(ipath, "path")));
      in.hours = positive(as_number(require_field(inputs[k], "hours", ipath), join(ipath, "hours")),
                          join(ipath, "hours"));
      phase.inputs.push_back(std::move(in));
    }
    if (phase.inputs.empty()) throw ConfigError(join(path, "inputs"), "needs at least one file");
    m.phases.push_back(std::move(phase));
  }
  return m;
}

RunManifest load_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_json_file(path), path.parent_path());
}

SimConfig parse_sim_config(const json& j) {
  sim::RenderSettings render;
  render.fps = positive(as_number(require_field(j, "fps", ""), "fps"), "fps");
  render.duration_s = positive(as_number(require_field(j, "duration_s", ""), "duration_s"), "duration_s");
  render.noise_sigma_px = number_or(j, "noise_sigma_px", "", 0.0);
  if (render.noise_sigma_px < 0.0) throw ConfigError("noise_sigma_px", "must be >= 0");
  if (const auto it = j.find("approach_zone"); it != j.end()) {
    render.approach_zone = as_polygon(*it, "approach_zone");
  }
  render.thresholds = parse_thresholds(j.value("thresholds", json()), "thresholds").maneuvers();

  const auto cm = j.find("class_map");
  const ClassMap class_map = cm == j.end() ? default_class_map() : as_class_map(*cm, "class_map");

  std::vector<sim::SyntheticVehicle> vehicles;
  const json& list = require_field(j, "vehicles", "");
  if (!list.is_array()) throw ConfigError("vehicles", "expected a list");
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string path = index("vehicles", i);
    const json& v = list[i];
    sim::SyntheticVehicle sv;
    const json& id = require_field(v, "id", path);
    if (!id.is_number_integer() || id.get<long long>() <= 0) {
      throw ConfigError(join(path, "id"), "must be a positive integer");
    }
    sv.id = id.get<std::int64_t>();
    for (const auto& other : vehicles) {
      if (other.id == sv.id) throw ConfigError(join(path, "id"), "duplicate vehicle id");
    }
    sv.entry_time_s = number_or(v, "entry_time_s", path, 0.0);
    if (sv.entry_time_s < 0.0) throw ConfigError(join(path, "entry_time_s"), "must be >= 0");
    sv.start = as_world(require_field(v, "start", path), join(path, "start"));
    sv.direction = unit_direction(require_field(v, "direction", path), join(path, "direction"));
    sv.path_length_m = positive(as_number(require_field(v, "path_length_m", path), join(path, "path_length_m")),
                                join(path, "path_length_m"));
    if (const auto bb = v.find("bbox"); bb != v.end()) {
      const auto [w, h] = as_pair(*bb, join(path, "bbox"));
      sv.bbox_width_px = positive(w, join(path, "bbox[0]"));
      sv.bbox_height_px = positive(h, join(path, "bbox[1]"));
    }
    const std::string label_name = v.contains("class") ? as_string(v["class"], join(path, "class")) : "car";
    const auto label = parse_class_label(label_name);
    if (!label) throw ConfigError(join(path, "class"), "unknown class label");
    sv.label = *label;
    if (const auto cid = v.find("class_id"); cid != v.end()) {
      if (!cid->is_number_integer()) throw ConfigError(join(path, "class_id"), "expected an integer");
      sv.class_id = cid->get<int>();
    } else {
      bool found = false;
      for (const auto& [cls, lbl] : class_map) {
        if (lbl == sv.label) {
          sv.class_id = cls;
          found = true;
          break;
        }
      }
      if (!found) throw ConfigError(join(path, "class"), "label absent from class_map");
    }
    sv.profile = parse_profile(require_field(v, "profile", path), join(path, "profile"));
    vehicles.push_back(std::move(sv));
  }

  return SimConfig{render, parse_sim_homography(j), std::move(vehicles)};
}

SimConfig load_sim_config(const std::filesystem::path& path) {
  return parse_sim_config(read_json_file(path));
}

}  // namespace calmcam
