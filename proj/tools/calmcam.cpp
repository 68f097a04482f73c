// calmcam: before/after speed analytics for fixed traffic cameras.
//
//   calmcam calibrate --config scene.json
//   calmcam analyze   --manifest run.json --out reports/
//   calmcam compare   --pre a.json --w1 b.json --w2 c.json --out reports/
//   calmcam simulate  --config sim.json --seed 42 --out sim/

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "calmcam/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Traffic-calming speed analytics from tracker output"};
  app.require_subcommand(1);

  std::string config, manifest, out_dir, pre, w1, w2, printed;
  std::uint64_t seed = 0;

  auto* calibrate = app.add_subcommand("calibrate", "Solve and check the scene homography");
  calibrate->add_option("--config", config, "Scene config JSON")->required()->check(CLI::ExistingFile);

  auto* analyze = app.add_subcommand("analyze", "Run the per-phase pipeline");
  analyze->add_option("--manifest", manifest, "Run manifest JSON")->required()->check(CLI::ExistingFile);
  analyze->add_option("--out", out_dir, "Output directory")->required();

  auto* compare = app.add_subcommand("compare", "Compare pre / week 1 / week 2 summaries");
  compare->add_option("--pre", pre, "Pre-installation summary JSON")->required()->check(CLI::ExistingFile);
  compare->add_option("--w1", w1, "Week 1 summary JSON")->required()->check(CLI::ExistingFile);
  compare->add_option("--w2", w2, "Week 2 summary JSON")->required()->check(CLI::ExistingFile);
  compare->add_option("--out", out_dir, "Output directory")->required();
  compare->add_option("--printed", printed, "CSV of printed table cells to audit")->check(CLI::ExistingFile);

  auto* simulate = app.add_subcommand("simulate", "Render a synthetic scene");
  simulate->add_option("--config", config, "Simulation config JSON")->required()->check(CLI::ExistingFile);
  simulate->add_option("--seed", seed, "RNG seed")->required();
  simulate->add_option("--out", out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : calmcam::cli::kInputError;
  }

  using namespace calmcam::cli;
  if (*calibrate) return cmd_calibrate(config, std::cout, std::cerr);
  if (*analyze) return cmd_analyze(manifest, out_dir, std::cout, std::cerr);
  if (*compare) {
    std::optional<std::filesystem::path> audit;
    if (!printed.empty()) audit = printed;
    return cmd_compare(pre, w1, w2, out_dir, audit, std::cout, std::cerr);
  }
  return cmd_simulate(config, seed, out_dir, std::cout, std::cerr);
}
