#include "calmcam/pipeline.hpp"

#include <fstream>
#include <sstream>

#include "calmcam/errors.hpp"
#include "calmcam/format.hpp"

namespace calmcam {

using nlohmann::json;
using nlohmann::ordered_json;

std::size_t StageAccounting::removed_total() const {
  return cascade.removed_aoi + cascade.removed_vehicle_type + cascade.removed_stationary +
         cascade.removed_following + cascade.removed_direction + removed_kinematics;
}

bool StageAccounting::balanced() const { return cascade.input - removed_total() == surviving; }

void process_tracks(std::vector<Track> tracks, std::size_t source, const SceneConfig& scene,
                    const Homography& h, PhaseResult& result) {
  const SceneGeometry geometry = scene.geometry();
  CascadeResult cascade = run_filter_cascade(std::move(tracks), geometry, h, scene.thresholds.filters());

  StageAccounting& acc = result.accounting;
  acc.cascade.input += cascade.counts.input;
  acc.cascade.removed_aoi += cascade.counts.removed_aoi;
  acc.cascade.removed_vehicle_type += cascade.counts.removed_vehicle_type;
  acc.cascade.removed_stationary += cascade.counts.removed_stationary;
  acc.cascade.removed_following += cascade.counts.removed_following;
  acc.cascade.removed_direction += cascade.counts.removed_direction;
  acc.cascade.surviving += cascade.counts.surviving;

  const WarningSink warn = [&result](const std::string& msg) { result.warnings.push_back(msg); };
  for (const Track& t : cascade.tracks) {
    const auto world = to_world_track(t, h, warn);
    std::optional<TrackKinematics> kin;
    if (world) kin = track_kinematics(*world, scene.fps, scene.thresholds.min_track_s);
    if (!kin) {
      ++acc.removed_kinematics;
      continue;
    }
    VehicleRecord rec{source, std::move(*kin), std::nullopt};
    if (!scene.signalized) {
      if (const auto v = approach_speed(rec.kinematics, *world, scene.approach_zone,
                                        scene.v_mean_reduction)) {
        rec.maneuver = ManeuverObservation{t.track_id, *v,
                                           classify_maneuver(*v, scene.thresholds.maneuvers())};
      }
    }
    result.vehicles.push_back(std::move(rec));
    ++acc.surviving;
  }
}

PhaseResult analyze_phase(const ManifestPhase& phase, const SceneConfig& scene, const Homography& h) {
  PhaseResult result;
  result.phase = phase.phase;
  result.hours = phase.hours();

  for (std::size_t i = 0; i < phase.inputs.size(); ++i) {
    const auto& path = phase.inputs[i].path;
    std::ifstream in(path);
    if (!in) throw InputFileError(path.string() + ": cannot open file");
    std::vector<Detection> detections;
    try {
      detections = parse_track_file(in, scene.class_map, [&](const std::string& msg) {
        result.warnings.push_back(path.string() + ": " + msg);
      });
    } catch (const MalformedRow& e) {
      throw InputFileError(path.string() + ": " + e.what());
    }
    result.accounting.raw_detections += detections.size();
    process_tracks(assemble_tracks(detections), i, scene, h, result);
  }

  if (!result.accounting.balanced()) {
    throw std::logic_error("filter accounting does not balance");
  }
  if (result.vehicles.empty()) {
    result.warnings.push_back("phase " + std::string(to_string(phase.phase)) +
                              ": no vehicles survived filtering, writing an empty report");
    return result;
  }

  std::vector<TrackKinematics> kin;
  std::vector<ManeuverObservation> maneuvers;
  kin.reserve(result.vehicles.size());
  for (const auto& v : result.vehicles) {
    kin.push_back(v.kinematics);
    if (v.maneuver) maneuvers.push_back(*v.maneuver);
  }
  result.summary = build_phase_summary(
      scene.location_id, phase.phase, kin, maneuvers, result.hours,
      {scene.percentile_method, scene.representative, scene.histogram_bin_mph});
  return result;
}

ordered_json summary_to_json(const PhaseResult& result, const SceneConfig& scene) {
  ordered_json j;
  j["location_id"] = scene.location_id;
  j["phase"] = std::string(to_string(result.phase));
  const PhaseSummary* s = result.summary ? &*result.summary : nullptr;
  j["empty"] = s == nullptr;
  j["sample_count"] = s ? s->sample_count : 0;
  j["vehicle_count"] = s ? s->vehicle_count : 0;
  j["raw_track_count"] = result.accounting.cascade.input;
  j["raw_detection_count"] = result.accounting.raw_detections;
  j["hours"] = result.hours;
  j["mean_mph"] = s ? ordered_json(*s->mean_mph) : ordered_json(nullptr);
  j["p85_mph"] = s ? ordered_json(*s->p85_mph) : ordered_json(nullptr);

  ordered_json bins = ordered_json::array();
  if (s) {
    for (const auto& [bin, count] : s->histogram.counts) {
      bins.push_back({{"bin_lo", static_cast<double>(bin) * s->histogram.bin_width}, {"count", count}});
    }
  }
  j["histogram_bin_mph"] = scene.histogram_bin_mph;
  j["histogram"] = std::move(bins);

  if (s && s->maneuvers) {
    const ManeuverShares& m = *s->maneuvers;
    j["maneuvers"] = {{"pass_through", m.share(ManeuverClass::PassThrough)},
                      {"slow_down", m.share(ManeuverClass::SlowDown)},
                      {"stop_and_go", m.share(ManeuverClass::StopAndGo)}};
    j["maneuver_counts"] = {{"pass_through", m.count(ManeuverClass::PassThrough)},
                            {"slow_down", m.count(ManeuverClass::SlowDown)},
                            {"stop_and_go", m.count(ManeuverClass::StopAndGo)}};
  } else {
    j["maneuvers"] = nullptr;
  }

  const StageAccounting& a = result.accounting;
  j["filter_stages"] = {{"input_tracks", a.cascade.input},
                        {"removed_aoi", a.cascade.removed_aoi},
                        {"removed_vehicle_type", a.cascade.removed_vehicle_type},
                        {"removed_stationary", a.cascade.removed_stationary},
                        {"removed_following", a.cascade.removed_following},
                        {"removed_direction", a.cascade.removed_direction},
                        {"removed_kinematics", a.removed_kinematics},
                        {"surviving", a.surviving}};
  j["settings"] = {
      {"percentile_method",
       scene.percentile_method == PercentileMethod::Interpolate ? "interpolate" : "nearest_rank"},
      {"representative",
       scene.representative == Representative::PerVehicle ? "per_vehicle" : "per_sample"},
      {"v_mean_reduction", scene.v_mean_reduction == ApproachReduction::Min ? "min" : "mean"}};
  return j;
}

PhaseSummary summary_from_json(const json& j) {
  try {
    PhaseSummary s;
    s.location_id = j.at("location_id").is_string() ? j.at("location_id").get<std::string>()
                                                    : j.at("location_id").dump();
    const auto phase = parse_phase(j.at("phase").get<std::string>());
    if (!phase) throw ConfigError("phase", "expected pre | post_w1 | post_w2");
    s.phase = *phase;
    s.sample_count = j.at("sample_count").get<std::size_t>();
    s.vehicle_count = j.value("vehicle_count", s.sample_count);
    s.hours = j.at("hours").get<double>();
    if (!j.at("mean_mph").is_null()) s.mean_mph = j.at("mean_mph").get<double>();
    if (!j.at("p85_mph").is_null()) s.p85_mph = j.at("p85_mph").get<double>();
    s.histogram.bin_width = j.value("histogram_bin_mph", 1.0);
    for (const auto& b : j.value("histogram", json::array())) {
      const auto bin = static_cast<std::int64_t>(
          std::llround(b.at("bin_lo").get<double>() / s.histogram.bin_width));
      s.histogram.counts[bin] = b.at("count").get<std::size_t>();
    }
    if (j.contains("maneuver_counts") && !j["maneuver_counts"].is_null()) {
      ManeuverShares m;
      const auto& c = j["maneuver_counts"];
      m.counts = {c.at("pass_through").get<std::size_t>(), c.at("slow_down").get<std::size_t>(),
                  c.at("stop_and_go").get<std::size_t>()};
      const auto& p = j.at("maneuvers");
      m.percent = {p.at("pass_through").get<double>(), p.at("slow_down").get<double>(),
                   p.at("stop_and_go").get<double>()};
      s.maneuvers = m;
    }
    return s;
  } catch (const json::exception& e) {
    throw ConfigError("summary", e.what());
  }
}

std::string kinematics_csv(const PhaseResult& result) {
  std::ostringstream out;
  out << "track_id,frame,speed_mph,window_frames,row_type,source\n";
  for (const auto& v : result.vehicles) {
    const auto& k = v.kinematics;
    for (const auto& s : k.speed_series) {
      out << k.track_id << ',' << s.frame << ',' << format_number(s.speed_mph) << ','
          << s.window_frames << ",sample," << v.source << '\n';
    }
    out << k.track_id << ",," << format_number(k.representative_speed_mph) << ','
        << k.speed_series.size() << ",summary," << v.source << '\n';
  }
  return out.str();
}

std::string maneuvers_csv(const PhaseResult& result) {
  std::ostringstream out;
  out << "track_id,v_mean_mph,class,source\n";
  for (const auto& v : result.vehicles) {
    if (!v.maneuver) continue;
    out << v.maneuver->track_id << ',' << format_number(v.maneuver->v_mean_mph) << ','
        << to_string(v.maneuver->maneuver) << ',' << v.source << '\n';
  }
  return out.str();
}

}  // namespace calmcam
