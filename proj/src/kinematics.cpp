#include "calmcam/kinematics.hpp"

#include <algorithm>
#include <cmath>

#include "calmcam/errors.hpp"

namespace calmcam {

std::optional<WorldTrack> to_world_track(const Track& track, const Homography& h,
                                         const WarningSink& warn) {
  WorldTrack out;
  out.track_id = track.track_id;
  out.samples.reserve(track.size());
  std::size_t dropped = 0;
  for (std::size_t i = 0; i < track.size(); ++i) {
    try {
      out.samples.push_back({track.detections[i].frame, image_to_world(h, track.anchors[i])});
    } catch (const AtInfinity& e) {
      ++dropped;
      if (warn) warn("track " + std::to_string(track.track_id) + ": " + e.what());
    }
  }
  if (static_cast<double>(dropped) > 0.1 * static_cast<double>(track.size())) {
    if (warn) {
      warn("track " + std::to_string(track.track_id) + ": dropped, " + std::to_string(dropped) +
           " of " + std::to_string(track.size()) + " anchors at infinity");
    }
    return std::nullopt;
  }
  return out;
}

std::vector<SpeedSample> speed_series(const WorldTrack& track, double fps, double min_track_s) {
  if (!(fps > 0.0)) throw ConfigError("fps", "must be positive");
  const auto& s = track.samples;
  const auto max_window = std::max<std::size_t>(2, static_cast<std::size_t>(std::lround(fps)));
  const auto warm_up =
      std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(fps * min_track_s)));

  std::vector<SpeedSample> out;
  if (s.size() < warm_up) return out;
  out.reserve(s.size() - warm_up + 1);
  for (std::size_t newest = warm_up - 1; newest < s.size(); ++newest) {
    const std::size_t window = std::min(newest + 1, max_window);
    const WorldSample& a = s[newest + 1 - window];
    const WorldSample& b = s[newest];
    const double d = std::hypot(b.position.x - a.position.x, b.position.y - a.position.y);
    const double dt = static_cast<double>(b.frame - a.frame) / fps;
    out.push_back({b.frame, d / dt * kMpsToMph, static_cast<int>(window)});
  }
  return out;
}

std::optional<TrackKinematics> track_kinematics(const WorldTrack& track, double fps,
                                                double min_track_s) {
  TrackKinematics k;
  k.track_id = track.track_id;
  k.speed_series = speed_series(track, fps, min_track_s);
  if (k.speed_series.empty()) return std::nullopt;
  double sum = 0.0;
  for (const auto& sample : k.speed_series) sum += sample.speed_mph;
  k.representative_speed_mph = sum / static_cast<double>(k.speed_series.size());
  return k;
}

}  // namespace calmcam
