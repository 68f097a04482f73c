#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "calmcam/behavior.hpp"
#include "calmcam/kinematics.hpp"

namespace calmcam {

enum class Phase { Pre, PostW1, PostW2 };

std::string_view to_string(Phase p);
std::optional<Phase> parse_phase(std::string_view name);

enum class PercentileMethod { Interpolate, NearestRank };
enum class Representative { PerVehicle, PerSample };

/// Throws EmptyInput on an empty list.
double mean_speed(std::span<const double> values);

/// `fraction` in [0, 1]. Interpolate: rank fraction*(n-1) between neighbouring
/// order statistics. NearestRank: the ceil(fraction*n)-th smallest value.
double percentile(std::span<const double> values, double fraction,
                  PercentileMethod method = PercentileMethod::Interpolate);

double percentile_85(std::span<const double> values,
                     PercentileMethod method = PercentileMethod::Interpolate);

/// Half-open bins [k*w, (k+1)*w), keyed by k.
struct Histogram {
  double bin_width = 1.0;
  std::map<std::int64_t, std::size_t> counts;

  std::size_t total() const;
  void merge(const Histogram& other);
  friend bool operator==(const Histogram&, const Histogram&) = default;
};

Histogram histogram(std::span<const double> values, double bin_width = 1.0);

struct PhaseSummary {
  std::string location_id;
  Phase phase = Phase::Pre;
  std::size_t sample_count = 0;   // values aggregated (vehicles unless per-sample)
  std::size_t vehicle_count = 0;  // vehicles surviving the pipeline
  double hours = 0.0;
  std::optional<double> mean_mph;
  std::optional<double> p85_mph;
  Histogram histogram;
  std::optional<ManeuverShares> maneuvers;
};

struct SummaryOptions {
  PercentileMethod percentile_method = PercentileMethod::Interpolate;
  Representative representative = Representative::PerVehicle;
  double bin_width_mph = 1.0;
};

/// Throws EmptyInput when `vehicles` is empty. Maneuver shares are attached
/// only when `maneuvers` is non-empty.
PhaseSummary build_phase_summary(std::string location_id, Phase phase,
                                 std::span<const TrackKinematics> vehicles,
                                 std::span<const ManeuverObservation> maneuvers, double hours,
                                 const SummaryOptions& options = {});

/// Half away from zero, one decimal.
double round1(double x);

struct ComparisonRow {
  std::string location_id;
  std::string metric;  // "mean" or "p85"
  double pre = 0.0;
  double post_w1 = 0.0;
  double post_w2 = 0.0;
  double delta_w1 = 0.0;
  double delta_w2 = 0.0;
};

ComparisonRow compare_values(std::string location_id, std::string metric, double pre,
                             double post_w1, double post_w2);

/// (mean row, p85 row). Throws LocationMismatch or EmptyInput.
std::pair<ComparisonRow, ComparisonRow> compare_phases(const PhaseSummary& pre,
                                                       const PhaseSummary& w1,
                                                       const PhaseSummary& w2);

/// 100 * (post - pre) / pre. Throws NonPositiveBaseline when pre <= 0.
double percent_change(double pre, double post);

/// A published before/after table row, deltas as printed.
struct PrintedRow {
  std::string location_id;
  std::string metric;
  double pre = 0.0;
  double post_w1 = 0.0;
  double delta_w1 = 0.0;
  double post_w2 = 0.0;
  double delta_w2 = 0.0;
};

struct DeltaDiscrepancy {
  std::string location_id;
  std::string metric;
  std::string column;  // "delta_w1" or "delta_w2"
  double printed = 0.0;
  double computed = 0.0;
};

/// Recomputes each delta from its row's values and lists the cells whose
/// printed value differs at one-decimal precision.
std::vector<DeltaDiscrepancy> audit_printed_deltas(std::span<const PrintedRow> rows);

}  // namespace calmcam
