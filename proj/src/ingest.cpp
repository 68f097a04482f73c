#include "calmcam/ingest.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <unordered_map>

#include "calmcam/errors.hpp"
#include "calmcam/format.hpp"

namespace calmcam {
namespace {

constexpr std::array<std::string_view, 7> kLabelNames = {
    "car", "bus", "truck", "motorcycle", "bicycle", "pedestrian", "other"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
bool parse_number(std::string_view field, T& out) {
  field = trim(field);
  if (field.empty()) return false;
  if (field.front() == '+') field.remove_prefix(1);
  const char* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, out);
  return ec == std::errc() && ptr == end;
}

Detection parse_row(std::string_view line, std::size_t line_no, const ClassMap& class_map,
                    const WarningSink& warn) {
  std::array<std::string_view, 8> fields{};
  std::size_t count = 0;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    const std::string_view field =
        line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    if (count < fields.size()) fields[count] = field;
    ++count;
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (count != fields.size()) {
    throw MalformedRow(line_no, "expected 8 columns, found " + std::to_string(count));
  }

  static constexpr std::array<const char*, 8> kNames = {
      "frame", "id", "bb_left", "bb_top", "bb_width", "bb_height", "conf", "class_id"};
  auto bad = [&](std::size_t i) {
    return MalformedRow(line_no, std::string("cannot parse ") + kNames[i] + " '" +
                                     std::string(trim(fields[i])) + "'");
  };

  Detection d;
  if (!parse_number(fields[0], d.frame)) throw bad(0);
  if (!parse_number(fields[1], d.track_id)) throw bad(1);
  if (!parse_number(fields[2], d.bbox.left)) throw bad(2);
  if (!parse_number(fields[3], d.bbox.top)) throw bad(3);
  if (!parse_number(fields[4], d.bbox.width)) throw bad(4);
  if (!parse_number(fields[5], d.bbox.height)) throw bad(5);
  if (!parse_number(fields[6], d.confidence)) throw bad(6);
  if (!parse_number(fields[7], d.class_id)) throw bad(7);

  if (d.frame < 0) throw MalformedRow(line_no, "negative frame index");
  if (d.track_id <= 0) throw MalformedRow(line_no, "track id must be positive");
  if (!std::isfinite(d.bbox.left) || !std::isfinite(d.bbox.top)) {
    throw MalformedRow(line_no, "non-finite box position");
  }
  if (!(d.bbox.width > 0.0) || !(d.bbox.height > 0.0) || !std::isfinite(d.bbox.width) ||
      !std::isfinite(d.bbox.height)) {
    throw MalformedRow(line_no, "box width and height must be positive");
  }
  if (!(d.confidence >= 0.0 && d.confidence <= 1.0)) {
    throw MalformedRow(line_no, "confidence outside [0, 1]");
  }

  const auto it = class_map.find(d.class_id);
  if (it != class_map.end()) {
    d.label = it->second;
  } else {
    d.label = ClassLabel::Other;
    if (warn) {
      warn("line " + std::to_string(line_no) + ": unknown class id " + std::to_string(d.class_id) +
           ", treating as other");
    }
  }
  return d;
}

bool is_inside(const Polygon& poly, ImagePoint p) { return poly.contains({p.u, p.v}); }

// Unit image-space direction of travel at `anchor`, or nullopt near the horizon.
std::optional<ImagePoint> image_travel_direction(const Homography& h, ImagePoint anchor,
                                                 WorldPoint travel_direction) {
  try {
    const WorldPoint w = image_to_world(h, anchor);
    const ImagePoint ahead =
        world_to_image(h, {w.x + travel_direction.x, w.y + travel_direction.y});
    const double du = ahead.u - anchor.u;
    const double dv = ahead.v - anchor.v;
    const double len = std::hypot(du, dv);
    if (!(len > 0.0) || !std::isfinite(len)) return std::nullopt;
    return ImagePoint{du / len, dv / len};
  } catch (const AtInfinity&) {
    return std::nullopt;
  }
}

std::optional<WorldPoint> net_displacement(const Track& t, const Homography& h) {
  try {
    const WorldPoint first = image_to_world(h, t.anchors.front());
    const WorldPoint last = image_to_world(h, t.anchors.back());
    return WorldPoint{last.x - first.x, last.y - first.y};
  } catch (const AtInfinity&) {
    return std::nullopt;
  }
}

}  // namespace

std::string_view to_string(ClassLabel label) {
  return kLabelNames[static_cast<std::size_t>(label)];
}

std::optional<ClassLabel> parse_class_label(std::string_view name) {
  for (std::size_t i = 0; i < kLabelNames.size(); ++i) {
    if (kLabelNames[i] == name) return static_cast<ClassLabel>(i);
  }
  return std::nullopt;
}

bool is_vehicle(ClassLabel label) {
  return label == ClassLabel::Car || label == ClassLabel::Bus || label == ClassLabel::Truck;
}

ImagePoint anchor_point(const BoundingBox& bbox) {
  return {bbox.left + bbox.width / 2.0, bbox.top + bbox.height};
}

std::vector<Detection> parse_track_file(std::istream& in, const ClassMap& class_map,
                                        const WarningSink& warn) {
  std::vector<Detection> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    out.push_back(parse_row(view, line_no, class_map, warn));
  }
  return out;
}

void write_track_file(std::ostream& out, std::span<const Detection> detections) {
  std::string buf;
  buf.reserve(96);
  for (const auto& d : detections) {
    buf.clear();
    buf += format_number(static_cast<long long>(d.frame));
    buf += ',';
    buf += format_number(static_cast<long long>(d.track_id));
    buf += ',';
    buf += format_number(d.bbox.left);
    buf += ',';
    buf += format_number(d.bbox.top);
    buf += ',';
    buf += format_number(d.bbox.width);
    buf += ',';
    buf += format_number(d.bbox.height);
    buf += ',';
    buf += format_number(d.confidence);
    buf += ',';
    buf += format_number(static_cast<long long>(d.class_id));
    buf += '\n';
    out << buf;
  }
}

std::vector<Track> assemble_tracks(std::span<const Detection> detections) {
  std::map<std::int64_t, std::vector<Detection>> groups;
  for (const auto& d : detections) groups[d.track_id].push_back(d);

  std::vector<Track> tracks;
  tracks.reserve(groups.size());
  for (auto& [id, dets] : groups) {
    std::stable_sort(dets.begin(), dets.end(),
                     [](const Detection& a, const Detection& b) { return a.frame < b.frame; });
    Track t;
    t.track_id = id;
    for (auto& d : dets) {
      if (!t.detections.empty() && t.detections.back().frame == d.frame) {
        if (d.confidence > t.detections.back().confidence) t.detections.back() = d;
        continue;
      }
      t.detections.push_back(d);
    }
    t.anchors.reserve(t.detections.size());
    for (const auto& d : t.detections) t.anchors.push_back(anchor_point(d.bbox));
    tracks.push_back(std::move(t));
  }
  return tracks;
}

std::optional<Track> clip_to_aoi(const Track& track, const Polygon& aoi) {
  std::size_t best_start = 0, best_len = 0;
  std::size_t run_start = 0, run_len = 0;
  for (std::size_t i = 0; i < track.size(); ++i) {
    if (is_inside(aoi, track.anchors[i])) {
      if (run_len == 0) run_start = i;
      ++run_len;
      if (run_len > best_len) {
        best_len = run_len;
        best_start = run_start;
      }
    } else {
      run_len = 0;
    }
  }
  if (best_len == 0) return std::nullopt;
  if (best_len == track.size()) return track;

  Track out;
  out.track_id = track.track_id;
  const auto first = static_cast<std::ptrdiff_t>(best_start);
  const auto last = static_cast<std::ptrdiff_t>(best_start + best_len);
  out.detections.assign(track.detections.begin() + first, track.detections.begin() + last);
  out.anchors.assign(track.anchors.begin() + first, track.anchors.begin() + last);
  return out;
}

std::vector<Track> filter_vehicle_type(std::vector<Track> tracks) {
  std::erase_if(tracks, [](const Track& t) {
    std::array<std::size_t, kLabelNames.size()> votes{};
    for (const auto& d : t.detections) ++votes[static_cast<std::size_t>(d.label)];
    const std::size_t top = *std::max_element(votes.begin(), votes.end());
    for (std::size_t i = 0; i < votes.size(); ++i) {
      if (votes[i] == top && is_vehicle(static_cast<ClassLabel>(i))) return false;
    }
    return true;
  });
  return tracks;
}

std::vector<Track> filter_stationary(std::vector<Track> tracks, const Homography& h,
                                     double min_displacement_m) {
  std::erase_if(tracks, [&](const Track& t) {
    const auto disp = net_displacement(t, h);
    return !disp || std::hypot(disp->x, disp->y) < min_displacement_m;
  });
  return tracks;
}

std::vector<Track> filter_following(std::vector<Track> tracks, const Homography& h,
                                    WorldPoint travel_direction, double max_gap_px,
                                    double min_fraction) {
  const std::size_t n = tracks.size();
  if (n < 2) return tracks;

  struct Slot {
    std::size_t track;
    ImagePoint anchor;
    std::optional<ImagePoint> heading;
  };
  std::unordered_map<std::int64_t, std::vector<Slot>> by_frame;
  for (std::size_t t = 0; t < n; ++t) {
    const Track& tr = tracks[t];
    for (std::size_t j = 0; j < tr.size(); ++j) {
      by_frame[tr.detections[j].frame].push_back(
          {t, tr.anchors[j], image_travel_direction(h, tr.anchors[j], travel_direction)});
    }
  }

  struct PairCount {
    std::size_t coexisting = 0;
    std::size_t following = 0;
  };
  std::unordered_map<std::uint64_t, PairCount> pairs;
  for (const auto& [frame, slots] : by_frame) {
    for (const Slot& follower : slots) {
      for (const Slot& leader : slots) {
        if (follower.track == leader.track) continue;
        PairCount& pc = pairs[static_cast<std::uint64_t>(follower.track) * n + leader.track];
        ++pc.coexisting;
        if (!follower.heading) continue;
        const double du = leader.anchor.u - follower.anchor.u;
        const double dv = leader.anchor.v - follower.anchor.v;
        const bool ahead = du * follower.heading->u + dv * follower.heading->v > 0.0;
        if (ahead && std::hypot(du, dv) < max_gap_px) ++pc.following;
      }
    }
  }

  std::vector<bool> drop(n, false);
  for (const auto& [key, pc] : pairs) {
    if (pc.following > 0 &&
        static_cast<double>(pc.following) >= min_fraction * static_cast<double>(pc.coexisting)) {
      drop[key / n] = true;
    }
  }

  std::vector<Track> kept;
  kept.reserve(n);
  for (std::size_t t = 0; t < n; ++t) {
    if (!drop[t]) kept.push_back(std::move(tracks[t]));
  }
  return kept;
}

std::vector<Track> filter_direction(std::vector<Track> tracks, const Homography& h,
                                    WorldPoint travel_direction, double max_angle_deg) {
  const double limit = max_angle_deg * std::numbers::pi / 180.0;
  std::erase_if(tracks, [&](const Track& t) {
    const auto disp = net_displacement(t, h);
    if (!disp || (disp->x == 0.0 && disp->y == 0.0)) return true;
    const double dot = disp->x * travel_direction.x + disp->y * travel_direction.y;
    const double cross = disp->x * travel_direction.y - disp->y * travel_direction.x;
    return std::atan2(std::abs(cross), dot) > limit;
  });
  return tracks;
}

CascadeResult run_filter_cascade(std::vector<Track> tracks, const SceneGeometry& scene,
                                 const Homography& h, const FilterThresholds& thresholds) {
  CascadeResult result;
  CascadeCounts& c = result.counts;
  c.input = tracks.size();

  std::vector<Track> clipped;
  clipped.reserve(tracks.size());
  for (const auto& t : tracks) {
    if (auto kept = clip_to_aoi(t, scene.aoi_polygon)) clipped.push_back(std::move(*kept));
  }
  c.removed_aoi = c.input - clipped.size();

  std::size_t before = clipped.size();
  auto typed = filter_vehicle_type(std::move(clipped));
  c.removed_vehicle_type = before - typed.size();

  before = typed.size();
  auto moving = filter_stationary(std::move(typed), h, thresholds.stationary_m);
  c.removed_stationary = before - moving.size();

  before = moving.size();
  auto leaders = filter_following(std::move(moving), h, scene.travel_direction,
                                  thresholds.following_px, thresholds.following_frac);
  c.removed_following = before - leaders.size();

  before = leaders.size();
  result.tracks =
      filter_direction(std::move(leaders), h, scene.travel_direction, thresholds.direction_deg);
  c.removed_direction = before - result.tracks.size();
  c.surviving = result.tracks.size();
  return result;
}

}  // namespace calmcam
