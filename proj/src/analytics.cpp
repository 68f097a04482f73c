#include "calmcam/analytics.hpp"

#include <algorithm>
#include <cmath>

#include "calmcam/errors.hpp"

namespace calmcam {
namespace {

std::int64_t tenths(double x) { return std::llround(x * 10.0); }

}  // namespace

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::Pre: return "pre";
    case Phase::PostW1: return "post_w1";
    case Phase::PostW2: return "post_w2";
  }
  return "unknown";
}

std::optional<Phase> parse_phase(std::string_view name) {
  for (auto p : {Phase::Pre, Phase::PostW1, Phase::PostW2}) {
    if (to_string(p) == name) return p;
  }
  return std::nullopt;
}

double mean_speed(std::span<const double> values) {
  if (values.empty()) throw EmptyInput("mean of an empty list");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double percentile(std::span<const double> values, double fraction, PercentileMethod method) {
  if (values.empty()) throw EmptyInput("percentile of an empty list");
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw ConfigError("percentile", "fraction outside [0, 1]");

  std::vector<double> v(values.begin(), values.end());
  const std::size_t n = v.size();
  auto order_stat = [&v](std::size_t k) {
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
    return v[k];
  };

  if (method == PercentileMethod::NearestRank) {
    // The epsilon keeps e.g. 0.85 * 100 = 85.00000000000001 at rank 85.
    const auto rank =
        static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
    return order_stat(rank == 0 ? 0 : rank - 1);
  }

  const double rank = fraction * static_cast<double>(n - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const auto hi = static_cast<std::size_t>(std::ceil(rank));
  const double lo_value = order_stat(lo);
  if (hi == lo) return lo_value;
  // After nth_element at lo, everything above lo is >= v[lo]; the next order
  // statistic is the minimum of that tail.
  const double hi_value = *std::min_element(v.begin() + static_cast<std::ptrdiff_t>(hi), v.end());
  return lo_value + (rank - static_cast<double>(lo)) * (hi_value - lo_value);
}

double percentile_85(std::span<const double> values, PercentileMethod method) {
  return percentile(values, 0.85, method);
}

std::size_t Histogram::total() const {
  std::size_t n = 0;
  for (const auto& [bin, count] : counts) n += count;
  return n;
}

void Histogram::merge(const Histogram& other) {
  if (other.bin_width != bin_width) throw ConfigError("histogram", "bin widths differ");
  for (const auto& [bin, count] : other.counts) counts[bin] += count;
}

Histogram histogram(std::span<const double> values, double bin_width) {
  if (!(bin_width > 0.0)) throw ConfigError("bin_width", "must be positive");
  Histogram h;
  h.bin_width = bin_width;
  for (double v : values) ++h.counts[static_cast<std::int64_t>(std::floor(v / bin_width))];
  return h;
}

PhaseSummary build_phase_summary(std::string location_id, Phase phase,
                                 std::span<const TrackKinematics> vehicles,
                                 std::span<const ManeuverObservation> maneuvers, double hours,
                                 const SummaryOptions& options) {
  if (!(hours > 0.0)) throw ConfigError("hours", "must be positive");
  if (vehicles.empty()) throw EmptyInput("no vehicles survived filtering");

  std::vector<double> values;
  if (options.representative == Representative::PerVehicle) {
    values.reserve(vehicles.size());
    for (const auto& k : vehicles) values.push_back(k.representative_speed_mph);
  } else {
    for (const auto& k : vehicles) {
      for (const auto& s : k.speed_series) values.push_back(s.speed_mph);
    }
  }

  PhaseSummary s;
  s.location_id = std::move(location_id);
  s.phase = phase;
  s.sample_count = values.size();
  s.vehicle_count = vehicles.size();
  s.hours = hours;
  s.mean_mph = mean_speed(values);
  s.p85_mph = percentile_85(values, options.percentile_method);
  s.histogram = histogram(values, options.bin_width_mph);
  if (!maneuvers.empty()) s.maneuvers = maneuver_distribution(maneuvers);
  return s;
}

double round1(double x) { return static_cast<double>(tenths(x)) / 10.0; }

ComparisonRow compare_values(std::string location_id, std::string metric, double pre,
                             double post_w1, double post_w2) {
  ComparisonRow row;
  row.location_id = std::move(location_id);
  row.metric = std::move(metric);
  row.pre = pre;
  row.post_w1 = post_w1;
  row.post_w2 = post_w2;
  row.delta_w1 = round1(post_w1 - pre);
  row.delta_w2 = round1(post_w2 - pre);
  return row;
}

std::pair<ComparisonRow, ComparisonRow> compare_phases(const PhaseSummary& pre,
                                                       const PhaseSummary& w1,
                                                       const PhaseSummary& w2) {
  if (pre.location_id != w1.location_id || pre.location_id != w2.location_id) {
    throw LocationMismatch("summaries belong to different locations: '" + pre.location_id +
                           "', '" + w1.location_id + "', '" + w2.location_id + "'");
  }
  for (const PhaseSummary* s : {&pre, &w1, &w2}) {
    if (!s->mean_mph || !s->p85_mph) {
      throw EmptyInput("phase " + std::string(to_string(s->phase)) + " of location " +
                       s->location_id + " has no vehicles");
    }
  }
  return {compare_values(pre.location_id, "mean", *pre.mean_mph, *w1.mean_mph, *w2.mean_mph),
          compare_values(pre.location_id, "p85", *pre.p85_mph, *w1.p85_mph, *w2.p85_mph)};
}

double percent_change(double pre, double post) {
  if (!(pre > 0.0)) throw NonPositiveBaseline("baseline speed must be positive");
  return 100.0 * (post - pre) / pre;
}

std::vector<DeltaDiscrepancy> audit_printed_deltas(std::span<const PrintedRow> rows) {
  std::vector<DeltaDiscrepancy> out;
  for (const auto& r : rows) {
    const ComparisonRow c = compare_values(r.location_id, r.metric, r.pre, r.post_w1, r.post_w2);
    if (tenths(c.delta_w1) != tenths(r.delta_w1)) {
      out.push_back({r.location_id, r.metric, "delta_w1", r.delta_w1, c.delta_w1});
    }
    if (tenths(c.delta_w2) != tenths(r.delta_w2)) {
      out.push_back({r.location_id, r.metric, "delta_w2", r.delta_w2, c.delta_w2});
    }
  }
  return out;
}

}  // namespace calmcam
