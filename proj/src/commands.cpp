#include "calmcam/commands.hpp"

#include <fstream>
#include <functional>
#include <future>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "calmcam/config.hpp"
#include "calmcam/errors.hpp"
#include "calmcam/format.hpp"
#include "calmcam/pipeline.hpp"
#include "calmcam/simulator.hpp"

namespace calmcam::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const DegenerateConfiguration& e) {
    err << "error: degenerate calibration: " << e.what();
    if (!e.offending.empty()) {
      err << " (points:";
      for (auto i : e.offending) err << ' ' << i;
      err << ')';
    }
    err << '\n';
    return kInputError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternalError;
  }
}

std::string file_stem(const std::string& location_id) {
  std::string s = location_id;
  for (char& c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '-' || c == '_';
    if (!ok) c = '_';
  }
  return s.empty() ? "location" : s;
}

void print_matrix(std::ostream& out, const Homography& h) {
  const auto e = h.entries();
  std::ostringstream s;
  s << std::setprecision(12);
  for (int r = 0; r < 3; ++r) {
    s << "  " << std::setw(20) << e[3 * r] << ' ' << std::setw(20) << e[3 * r + 1] << ' '
      << std::setw(20) << e[3 * r + 2] << '\n';
  }
  out << s.str();
}

struct Calibration {
  Homography h;
  double rmse;
};

Calibration calibrate(const SceneConfig& scene) {
  Homography h = solve_homography(scene.correspondences);
  return {h, reprojection_rmse(h, scene.correspondences)};
}

PrintedRow parse_printed_row(const std::string& line, std::size_t line_no) {
  std::vector<std::string> f;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) f.push_back(cell);
  if (f.size() != 7) throw MalformedRow(line_no, "expected 7 columns");
  auto num = [&](std::size_t i) {
    try {
      std::size_t used = 0;
      const double v = std::stod(f[i], &used);
      if (used != f[i].size()) throw std::invalid_argument(f[i]);
      return v;
    } catch (const std::exception&) {
      throw MalformedRow(line_no, "cannot parse '" + f[i] + "'");
    }
  };
  return {f[0], f[1], num(2), num(3), num(4), num(5), num(6)};
}

}  // namespace

int cmd_calibrate(const fs::path& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const SceneConfig scene = load_scene_config(config);
    const Calibration cal = calibrate(scene);
    out << "location " << scene.location_id << ": " << scene.correspondences.size()
        << " correspondences\nH (world m -> image px):\n";
    print_matrix(out, cal.h);
    out << "reprojection RMSE: " << std::setprecision(6) << cal.rmse << " px (gate "
        << scene.calibration_gate_px << " px)\n";
    if (cal.rmse > scene.calibration_gate_px) {
      err << "error: reprojection RMSE " << cal.rmse << " px exceeds the gate of "
          << scene.calibration_gate_px << " px\n";
      return static_cast<int>(kCalibrationGate);
    }
    return static_cast<int>(kOk);
  });
}

int cmd_analyze(const fs::path& manifest_path, const fs::path& out_dir, std::ostream& out,
                std::ostream& err) {
  return guarded(err, [&] {
    const RunManifest manifest = load_manifest(manifest_path);
    const SceneConfig scene = load_scene_config(manifest.scene_path);
    const Calibration cal = calibrate(scene);
    if (cal.rmse > scene.calibration_gate_px) {
      err << "error: calibration RMSE " << cal.rmse << " px exceeds the gate of "
          << scene.calibration_gate_px << " px\n";
      return static_cast<int>(kCalibrationGate);
    }
    fs::create_directories(out_dir);

    std::vector<std::future<PhaseResult>> jobs;
    jobs.reserve(manifest.phases.size());
    for (const auto& phase : manifest.phases) {
      jobs.push_back(std::async(std::launch::async, [&scene, &cal, &phase] {
        return analyze_phase(phase, scene, cal.h);
      }));
    }

    int status = kOk;
    const std::string stem = file_stem(scene.location_id);
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      const std::string phase_name(to_string(manifest.phases[i].phase));
      PhaseResult result;
      try {
        result = jobs[i].get();
      } catch (const InputFileError& e) {
        err << "error: phase " << phase_name << ": " << e.what() << '\n';
        status = kInputError;
        continue;
      }
      for (const auto& w : result.warnings) err << "warning: " << w << '\n';

      const StageAccounting& a = result.accounting;
      out << "phase " << phase_name << ": " << a.raw_detections << " detections, "
          << a.cascade.input << " tracks; removed aoi=" << a.cascade.removed_aoi
          << " vehicle_type=" << a.cascade.removed_vehicle_type
          << " stationary=" << a.cascade.removed_stationary
          << " following=" << a.cascade.removed_following
          << " direction=" << a.cascade.removed_direction
          << " kinematics=" << a.removed_kinematics << "; surviving=" << a.surviving << '\n';
      if (result.summary) {
        out << "  mean " << format_fixed(*result.summary->mean_mph, 1) << " mph, p85 "
            << format_fixed(*result.summary->p85_mph, 1) << " mph over "
            << result.summary->sample_count << " samples, " << format_number(result.hours) << " h\n";
      }

      const fs::path base = out_dir / (stem + "_" + phase_name);
      write_file_atomic(base.string() + "_summary.json", summary_to_json(result, scene).dump(2) + "\n");
      write_file_atomic(base.string() + "_kinematics.csv", kinematics_csv(result));
      write_file_atomic(base.string() + "_maneuvers.csv", maneuvers_csv(result));
    }
    return status;
  });
}

int cmd_compare(const fs::path& pre_path, const fs::path& w1_path, const fs::path& w2_path,
                const fs::path& out_dir, const std::optional<fs::path>& printed, std::ostream& out,
                std::ostream& err) {
  return guarded(err, [&] {
    auto load = [](const fs::path& p, Phase expected) {
      PhaseSummary s = summary_from_json(read_json_file(p));
      if (s.phase != expected) {
        throw ConfigError(p.string(), "expected a " + std::string(to_string(expected)) +
                                          " summary, found " + std::string(to_string(s.phase)));
      }
      return s;
    };
    const PhaseSummary pre = load(pre_path, Phase::Pre);
    const PhaseSummary w1 = load(w1_path, Phase::PostW1);
    const PhaseSummary w2 = load(w2_path, Phase::PostW2);
    const auto [mean_row, p85_row] = compare_phases(pre, w1, w2);

    fs::create_directories(out_dir);
    std::string table = "loc_id,metric,pre,post_w1,delta_w1,post_w2,delta_w2\n";
    std::string pct = "loc_id,metric,pre,post_w1,pct_w1,post_w2,pct_w2\n";
    ordered_json report = ordered_json::array();
    for (const ComparisonRow* r : {&mean_row, &p85_row}) {
      const double pct_w1 = percent_change(r->pre, r->post_w1);
      const double pct_w2 = percent_change(r->pre, r->post_w2);
      table += r->location_id + "," + r->metric + "," + format_fixed(r->pre, 1) + "," +
               format_fixed(r->post_w1, 1) + "," + format_fixed(r->delta_w1, 1) + "," +
               format_fixed(r->post_w2, 1) + "," + format_fixed(r->delta_w2, 1) + "\n";
      pct += r->location_id + "," + r->metric + "," + format_fixed(r->pre, 1) + "," +
             format_fixed(r->post_w1, 1) + "," + format_fixed(pct_w1, 2) + "," +
             format_fixed(r->post_w2, 1) + "," + format_fixed(pct_w2, 2) + "\n";
      report.push_back({{"loc_id", r->location_id}, {"metric", r->metric}, {"pre", r->pre},
                        {"post_w1", r->post_w1}, {"post_w2", r->post_w2},
                        {"delta_w1", r->delta_w1}, {"delta_w2", r->delta_w2},
                        {"pct_w1", pct_w1}, {"pct_w2", pct_w2}});
      out << r->metric << ": pre " << format_fixed(r->pre, 1) << ", W1 "
          << format_fixed(r->post_w1, 1) << " (" << format_fixed(r->delta_w1, 1) << ", "
          << format_fixed(pct_w1, 2) << "%), W2 " << format_fixed(r->post_w2, 1) << " ("
          << format_fixed(r->delta_w2, 1) << ", " << format_fixed(pct_w2, 2) << "%)\n";
    }
    write_file_atomic((out_dir / "comparison.csv").string(), table);
    write_file_atomic((out_dir / "percent_change.csv").string(), pct);
    write_file_atomic((out_dir / "comparison.json").string(), report.dump(2) + "\n");

    if (printed) {
      std::ifstream in(*printed);
      if (!in) throw ConfigError(printed->string(), "cannot open file");
      std::vector<PrintedRow> rows;
      std::string line;
      std::size_t line_no = 0;
      while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.starts_with("loc_id") || line.starts_with('#')) continue;
        rows.push_back(parse_printed_row(line, line_no));
      }
      std::string disc = "loc_id,metric,column,printed,computed\n";
      for (const auto& d : audit_printed_deltas(rows)) {
        disc += d.location_id + "," + d.metric + "," + d.column + "," + format_fixed(d.printed, 1) +
                "," + format_fixed(d.computed, 1) + "\n";
        out << "discrepancy: loc " << d.location_id << ' ' << d.metric << ' ' << d.column
            << " printed " << format_fixed(d.printed, 1) << ", values give "
            << format_fixed(d.computed, 1) << '\n';
      }
      write_file_atomic((out_dir / "discrepancies.csv").string(), disc);
    }
    return static_cast<int>(kOk);
  });
}

int cmd_simulate(const fs::path& config, std::uint64_t seed, const fs::path& out_dir,
                 std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    SimConfig cfg = load_sim_config(config);
    cfg.render.seed = seed;
    const sim::RenderedScene scene = sim::render_scene(cfg.vehicles, cfg.homography, cfg.render);

    fs::create_directories(out_dir);
    std::ostringstream det;
    write_track_file(det, scene.detections);
    write_file_atomic((out_dir / "detections.csv").string(), det.str());
    std::ostringstream gt;
    sim::write_ground_truth(gt, scene.truth);
    write_file_atomic((out_dir / "ground_truth.csv").string(), gt.str());

    double speed_sum = 0.0;
    std::array<std::size_t, 3> maneuvers{};
    std::size_t outside_zone = 0;
    for (const auto& [id, v] : scene.truth.vehicles) {
      speed_sum += v.mean_speed_mph;
      if (v.maneuver) {
        ++maneuvers[static_cast<std::size_t>(*v.maneuver)];
      } else {
        ++outside_zone;
      }
    }
    const std::size_t n = scene.truth.vehicles.size();
    const double mean = n > 0 ? speed_sum / static_cast<double>(n) : 0.0;

    ordered_json fleet;
    fleet["seed"] = seed;
    fleet["fps"] = cfg.render.fps;
    fleet["duration_s"] = cfg.render.duration_s;
    fleet["noise_sigma_px"] = cfg.render.noise_sigma_px;
    fleet["vehicles"] = n;
    fleet["detections"] = scene.detections.size();
    fleet["mean_speed_mph"] = mean;
    fleet["maneuvers"] = {{"pass_through", maneuvers[0]},
                          {"slow_down", maneuvers[1]},
                          {"stop_and_go", maneuvers[2]},
                          {"outside_zone", outside_zone}};
    ordered_json homography = ordered_json::array();
    for (double e : cfg.homography.entries()) homography.push_back(e);
    fleet["homography"] = std::move(homography);
    write_file_atomic((out_dir / "fleet.json").string(), fleet.dump(2) + "\n");

    out << "simulated " << n << " vehicles, " << scene.detections.size() << " detections; mean "
        << format_fixed(mean, 2) << " mph; pass_through=" << maneuvers[0]
        << " slow_down=" << maneuvers[1] << " stop_and_go=" << maneuvers[2] << '\n';
    return static_cast<int>(kOk);
  });
}

}  // namespace calmcam::cli
