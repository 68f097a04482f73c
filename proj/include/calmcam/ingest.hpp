#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "calmcam/geometry.hpp"
#include "calmcam/polygon.hpp"

namespace calmcam {

enum class ClassLabel { Car, Bus, Truck, Motorcycle, Bicycle, Pedestrian, Other };

std::string_view to_string(ClassLabel label);
std::optional<ClassLabel> parse_class_label(std::string_view name);
bool is_vehicle(ClassLabel label);

/// Tracker class id -> label.
using ClassMap = std::map<int, ClassLabel>;

/// Receives non-fatal diagnostics (unknown class ids, dropped points, ...).
using WarningSink = std::function<void(const std::string&)>;

struct BoundingBox {
  double left = 0.0;
  double top = 0.0;
  double width = 0.0;
  double height = 0.0;
  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct Detection {
  std::int64_t frame = 0;
  std::int64_t track_id = 0;
  BoundingBox bbox;
  double confidence = 0.0;
  int class_id = 0;
  ClassLabel label = ClassLabel::Other;
  friend bool operator==(const Detection&, const Detection&) = default;
};

/// Frame-ordered detections of one tracker identity with their ground anchors.
struct Track {
  std::int64_t track_id = 0;
  std::vector<Detection> detections;
  std::vector<ImagePoint> anchors;

  std::size_t size() const { return detections.size(); }
  friend bool operator==(const Track&, const Track&) = default;
};

/// Bottom-center of the box: where the vehicle touches the road.
ImagePoint anchor_point(const BoundingBox& bbox);

/// Reads the headerless `frame,id,bb_left,bb_top,bb_width,bb_height,conf,class_id`
/// format. Blank lines and lines starting with '#' are skipped. Throws
/// MalformedRow with the 1-based physical line number.
std::vector<Detection> parse_track_file(std::istream& in, const ClassMap& class_map,
                                        const WarningSink& warn = {});

/// Inverse of parse_track_file; numbers use the shortest round-trip form.
void write_track_file(std::ostream& out, std::span<const Detection> detections);

/// Groups by id (ascending), sorts each group by frame, keeps the more
/// confident detection on duplicate frames.
std::vector<Track> assemble_tracks(std::span<const Detection> detections);

// Filter cascade, applied in this order by run_filter_cascade.

std::optional<Track> clip_to_aoi(const Track& track, const Polygon& aoi);

std::vector<Track> filter_vehicle_type(std::vector<Track> tracks);

std::vector<Track> filter_stationary(std::vector<Track> tracks, const Homography& h,
                                     double min_displacement_m = 2.0);

std::vector<Track> filter_following(std::vector<Track> tracks, const Homography& h,
                                    WorldPoint travel_direction, double max_gap_px = 40.0,
                                    double min_fraction = 0.5);

std::vector<Track> filter_direction(std::vector<Track> tracks, const Homography& h,
                                    WorldPoint travel_direction, double max_angle_deg = 45.0);

struct FilterThresholds {
  double stationary_m = 2.0;
  double following_px = 40.0;
  double following_frac = 0.5;
  double direction_deg = 45.0;
};

struct SceneGeometry {
  double fps = 10.0;
  Polygon aoi_polygon;
  Polygon approach_zone;
  WorldPoint travel_direction;
  ClassMap class_map;
};

struct CascadeCounts {
  std::size_t input = 0;
  std::size_t removed_aoi = 0;
  std::size_t removed_vehicle_type = 0;
  std::size_t removed_stationary = 0;
  std::size_t removed_following = 0;
  std::size_t removed_direction = 0;
  std::size_t surviving = 0;
};

struct CascadeResult {
  std::vector<Track> tracks;
  CascadeCounts counts;
};

CascadeResult run_filter_cascade(std::vector<Track> tracks, const SceneGeometry& scene,
                                 const Homography& h, const FilterThresholds& thresholds = {});

}  // namespace calmcam
