#include "calmcam/behavior.hpp"

#include <algorithm>
#include <limits>
#include <string>
#include <unordered_map>

#include "calmcam/errors.hpp"

namespace calmcam {

std::string_view to_string(ManeuverClass c) {
  switch (c) {
    case ManeuverClass::PassThrough: return "pass_through";
    case ManeuverClass::SlowDown: return "slow_down";
    case ManeuverClass::StopAndGo: return "stop_and_go";
  }
  return "unknown";
}

std::optional<ManeuverClass> parse_maneuver_class(std::string_view name) {
  for (auto c : {ManeuverClass::PassThrough, ManeuverClass::SlowDown, ManeuverClass::StopAndGo}) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

std::optional<double> approach_speed(const TrackKinematics& kinematics,
                                     const WorldTrack& world_track, const Polygon& approach_zone,
                                     ApproachReduction reduction) {
  std::unordered_map<std::int64_t, WorldPoint> position_at;
  position_at.reserve(world_track.samples.size());
  for (const auto& s : world_track.samples) position_at.emplace(s.frame, s.position);

  double lowest = std::numeric_limits<double>::infinity();
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& sample : kinematics.speed_series) {
    const auto it = position_at.find(sample.frame);
    if (it == position_at.end()) continue;
    if (!approach_zone.contains({it->second.x, it->second.y})) continue;
    lowest = std::min(lowest, sample.speed_mph);
    sum += sample.speed_mph;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return reduction == ApproachReduction::Min ? lowest : sum / static_cast<double>(n);
}

ManeuverClass classify_maneuver(double v_mean_mph, const ManeuverThresholds& t) {
  if (v_mean_mph < t.stop_and_go_below_mph) return ManeuverClass::StopAndGo;
  if (v_mean_mph < t.slow_down_below_mph) return ManeuverClass::SlowDown;
  return ManeuverClass::PassThrough;
}

ManeuverShares maneuver_distribution(std::span<const ManeuverObservation> observations) {
  if (observations.empty()) throw EmptyInput("maneuver distribution of zero observations");
  ManeuverShares shares;
  for (const auto& o : observations) ++shares.counts[static_cast<std::size_t>(o.maneuver)];
  const auto n = static_cast<double>(observations.size());
  for (std::size_t i = 0; i < 3; ++i) {
    shares.percent[i] = 100.0 * static_cast<double>(shares.counts[i]) / n;
  }
  return shares;
}

}  // namespace calmcam
