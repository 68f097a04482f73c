#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "calmcam/geometry.hpp"
#include "calmcam/ingest.hpp"

namespace calmcam {

inline constexpr double kMpsToMph = 2.2369362920544;

struct WorldSample {
  std::int64_t frame = 0;
  WorldPoint position;
};

struct WorldTrack {
  std::int64_t track_id = 0;
  std::vector<WorldSample> samples;
};

/// One sliding-window speed measurement, reported at the window's newest frame.
struct SpeedSample {
  std::int64_t frame = 0;
  double speed_mph = 0.0;
  int window_frames = 0;
};

struct TrackKinematics {
  std::int64_t track_id = 0;
  std::vector<SpeedSample> speed_series;
  double representative_speed_mph = 0.0;
};

/// Projects each anchor onto the road plane. Anchors at infinity are dropped
/// with a warning; if more than 10% drop the whole track is rejected.
std::optional<WorldTrack> to_world_track(const Track& track, const Homography& h,
                                         const WarningSink& warn = {});

/// Endpoint displacement over the last min(history, round(fps)) tracked
/// positions divided by their frame span. Reporting starts once the history
/// holds ceil(fps * min_track_s) positions.
std::vector<SpeedSample> speed_series(const WorldTrack& track, double fps,
                                      double min_track_s = 0.5);

/// Mean of the speed series; nullopt when the track is too short to report.
std::optional<TrackKinematics> track_kinematics(const WorldTrack& track, double fps,
                                                double min_track_s = 0.5);

}  // namespace calmcam
