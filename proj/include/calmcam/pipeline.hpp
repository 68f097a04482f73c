#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "calmcam/analytics.hpp"
#include "calmcam/config.hpp"
#include "calmcam/errors.hpp"

namespace calmcam {

/// Per-stage track accounting for one phase, summed over its input files.
/// input - (all removals) == surviving.
struct StageAccounting {
  std::size_t raw_detections = 0;
  CascadeCounts cascade;
  std::size_t removed_kinematics = 0;  // unprojectable or shorter than the warm-up
  std::size_t surviving = 0;

  std::size_t removed_total() const;
  bool balanced() const;
};

struct VehicleRecord {
  std::size_t source = 0;  // index of the input file within the phase
  TrackKinematics kinematics;
  std::optional<ManeuverObservation> maneuver;
};

struct PhaseResult {
  Phase phase = Phase::Pre;
  double hours = 0.0;
  StageAccounting accounting;
  std::vector<VehicleRecord> vehicles;
  std::optional<PhaseSummary> summary;  // unset for an empty phase
  std::vector<std::string> warnings;
};

/// Runs ingest -> cascade -> kinematics -> behavior on one already-parsed track
/// set and appends the survivors to `result`.
void process_tracks(std::vector<Track> tracks, std::size_t source, const SceneConfig& scene,
                    const Homography& h, PhaseResult& result);

/// Parses every input of the phase and builds its summary. Parse failures
/// propagate as MalformedRow prefixed with the file path.
PhaseResult analyze_phase(const ManifestPhase& phase, const SceneConfig& scene, const Homography& h);

class InputFileError : public Error {
 public:
  using Error::Error;
};

// Report encodings.
nlohmann::ordered_json summary_to_json(const PhaseResult& result, const SceneConfig& scene);
PhaseSummary summary_from_json(const nlohmann::json& j);

/// `track_id,frame,speed_mph,window_frames,row_type,source` with a header;
/// `sample` rows per speed sample, then one `summary` row per vehicle carrying
/// the representative speed and the sample count in window_frames.
std::string kinematics_csv(const PhaseResult& result);

/// `track_id,v_mean_mph,class,source` with a header.
std::string maneuvers_csv(const PhaseResult& result);

}  // namespace calmcam
