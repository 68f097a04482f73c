// Before/after speed tables from the nine-site field deployment, as printed
// (mph, one decimal). Unsignalized sites 1-3, signalized sites 4-9.
#pragma once

#include <vector>

#include "calmcam/analytics.hpp"

namespace calmcam::testkit {

inline std::vector<PrintedRow> field_mean_rows() {
  return {
      {"1", "mean", 25.6, 20.9, -4.7, 20.8, -4.8},
      {"2", "mean", 27.4, 22.4, -5.0, 25.2, -2.2},
      {"3", "mean", 25.7, 23.0, -2.7, 22.9, -2.8},
      {"4", "mean", 13.7, 11.1, -2.6, 11.8, -1.9},
      {"5", "mean", 17.0, 13.9, -3.1, 14.6, -2.4},
      {"6", "mean", 13.9, 12.1, -1.8, 15.7, +3.6},
      {"7", "mean", 14.8, 15.5, +0.7, 13.7, -1.1},
      {"8", "mean", 24.6, 21.4, -3.2, 21.3, -3.3},
      {"9", "mean", 21.5, 19.4, -2.1, 17.2, -4.3},
  };
}

inline std::vector<PrintedRow> field_p85_rows() {
  return {
      {"1", "p85", 29.2, 25.8, -3.4, 25.9, -3.3},
      {"2", "p85", 32.6, 27.2, -5.4, 29.2, -3.4},
      {"3", "p85", 29.2, 27.2, -2.0, 27.2, -2.0},
      {"4", "p85", 21.8, 19.7, -2.1, 20.4, -1.4},
      {"5", "p85", 25.2, 21.1, -4.1, 22.5, -2.7},
      {"6", "p85", 20.4, 18.5, -1.7, 24.6, +4.2},
      {"7", "p85", 19.8, 19.5, -0.3, 18.0, -1.8},
      {"8", "p85", 32.0, 26.5, -5.5, 26.5, -5.5},
      {"9", "p85", 28.6, 26.5, -2.1, 25.8, -2.8},
  };
}

}  // namespace calmcam::testkit
