#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

namespace calmcam::cli {

enum ExitCode : int {
  kOk = 0,
  kInputError = 2,
  kCalibrationGate = 3,
  kInternalError = 4,
};

/// Solves the scene homography and reports it with its reprojection RMSE.
int cmd_calibrate(const std::filesystem::path& config, std::ostream& out, std::ostream& err);

/// Runs every manifest phase and writes `<loc>_<phase>_summary.json`,
/// `<loc>_<phase>_kinematics.csv` and `<loc>_<phase>_maneuvers.csv` to `out_dir`.
int cmd_analyze(const std::filesystem::path& manifest, const std::filesystem::path& out_dir,
                std::ostream& out, std::ostream& err);

/// Writes `comparison.csv`, `percent_change.csv` and `comparison.json`. With
/// `printed`, also audits a table of printed deltas into `discrepancies.csv`.
int cmd_compare(const std::filesystem::path& pre, const std::filesystem::path& w1,
                const std::filesystem::path& w2, const std::filesystem::path& out_dir,
                const std::optional<std::filesystem::path>& printed, std::ostream& out,
                std::ostream& err);

/// Writes `detections.csv`, `ground_truth.csv` and `fleet.json` to `out_dir`.
int cmd_simulate(const std::filesystem::path& config, std::uint64_t seed,
                 const std::filesystem::path& out_dir, std::ostream& out, std::ostream& err);

}  // namespace calmcam::cli
