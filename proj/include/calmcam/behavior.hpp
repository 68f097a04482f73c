#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include "calmcam/kinematics.hpp"
#include "calmcam/polygon.hpp"

namespace calmcam {

enum class ManeuverClass { PassThrough, SlowDown, StopAndGo };

std::string_view to_string(ManeuverClass c);
std::optional<ManeuverClass> parse_maneuver_class(std::string_view name);

enum class ApproachReduction { Min, Mean };

struct ManeuverThresholds {
  double stop_and_go_below_mph = 5.0;
  double slow_down_below_mph = 10.0;
};

struct ManeuverObservation {
  std::int64_t track_id = 0;
  double v_mean_mph = 0.0;
  ManeuverClass maneuver = ManeuverClass::PassThrough;
};

/// Reduces the speed samples whose reporting position lies inside the
/// approach zone (min by default). nullopt if no sample does.
std::optional<double> approach_speed(const TrackKinematics& kinematics,
                                     const WorldTrack& world_track, const Polygon& approach_zone,
                                     ApproachReduction reduction = ApproachReduction::Min);

/// [0, 5) stop-and-go, [5, 10) slow-down, [10, inf) pass-through.
ManeuverClass classify_maneuver(double v_mean_mph, const ManeuverThresholds& t = {});

/// Counts and percentages indexed by ManeuverClass.
struct ManeuverShares {
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> percent{};
  std::size_t total() const { return counts[0] + counts[1] + counts[2]; }
  double share(ManeuverClass c) const { return percent[static_cast<std::size_t>(c)]; }
  std::size_t count(ManeuverClass c) const { return counts[static_cast<std::size_t>(c)]; }
};

/// Throws EmptyInput when there are no observations.
ManeuverShares maneuver_distribution(std::span<const ManeuverObservation> observations);

}  // namespace calmcam
