#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "calmcam/errors.hpp"
#include "calmcam/simulator.hpp"
#include "support/fixtures.hpp"

using namespace calmcam;
using namespace calmcam::sim;

namespace {

std::string render_csv(const std::vector<SyntheticVehicle>& fleet, double sigma, std::uint64_t seed) {
  RenderSettings rs;
  rs.fps = 10.0;
  rs.duration_s = testkit::fleet_duration(fleet);
  rs.noise_sigma_px = sigma;
  rs.seed = seed;
  return testkit::detections_csv(render_scene(fleet, testkit::road_homography(), rs).detections);
}

}  // namespace

TEST(Integrate, ConstantTenMetresPerSecond) {
  const auto s = integrate_profile(ConstantSpeed{22.369362920544}, 10.0, 2.0);
  ASSERT_EQ(s.size(), 21u);
  for (const auto& p : s) {
    EXPECT_NEAR(p.distance_m, static_cast<double>(p.frame) * 1.0, 1e-9);
    EXPECT_NEAR(p.speed_mph, 22.369362920544, 1e-9);
  }
}

TEST(Integrate, TrapezoidDwell) {
  const auto s = integrate_profile(TrapezoidStop{20.0, 3.0, 1.0, 2.0, 30.0}, 10.0, 20.0);
  std::size_t run = 0, best = 0;
  for (const auto& p : s) {
    run = p.speed_mph == 0.0 ? run + 1 : 0;
    best = std::max(best, run);
  }
  EXPECT_GE(best, 10u);
  EXPECT_LE(best, 11u);
  // comes to rest at the requested distance
  const auto stopped = std::find_if(s.begin(), s.end(), [](const auto& p) { return p.speed_mph == 0.0; });
  ASSERT_NE(stopped, s.end());
  EXPECT_NEAR(stopped->distance_m, 30.0, 1e-9);
}

TEST(Integrate, LinearRampHalfATSquared) {
  const PiecewiseLinear ramp{{{0.0, 0.0}, {2.0, 10.0 * kMpsToMph}}};
  const auto s = integrate_profile(ramp, 10.0, 2.0);
  EXPECT_NEAR(s.back().distance_m, 0.5 * 5.0 * 2.0 * 2.0, 1e-9);
  for (const auto& p : s) {
    const double t = p.frame / 10.0;
    EXPECT_NEAR(p.distance_m, 2.5 * t * t, 1e-9);
  }
}

TEST(Integrate, DistanceMatchesTrapezoidRuleOfSpeeds) {
  // speed is piecewise linear in time so the trapezoid rule is exact per
  // segment; integrate on a grid aligned to every knot
  const PiecewiseLinear p{{{0.5, 30.0}, {1.5, 10.0}, {4.5, 10.0}, {5.5, 25.0}}};
  const auto s = integrate_profile(p, 10.0, 8.0);
  double d = 0.0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    d += 0.5 * (s[i - 1].speed_mph + s[i].speed_mph) / kMpsToMph * 0.1;
    EXPECT_NEAR(s[i].distance_m, d, 1e-9);
  }
}

TEST(Profiles, Validation) {
  EXPECT_THROW(validate_profile(ConstantSpeed{-1.0}), ConfigError);
  EXPECT_THROW(validate_profile(TrapezoidStop{20, 0, 1, 2, 50}), ConfigError);
  EXPECT_THROW(validate_profile(TrapezoidStop{20, 3, 1, 2, 1}), ConfigError);  // cannot brake in time
  EXPECT_THROW(validate_profile(PiecewiseLinear{{{1, 5}, {1, 6}}}), ConfigError);
  EXPECT_THROW(validate_profile(PiecewiseLinear{}), ConfigError);
  try {
    validate_profile(TrapezoidStop{20, 3, -1, 2, 50}, "vehicles[3].profile");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.path, "vehicles[3].profile.dwell_s");
  }
}

TEST(Camera, OpticalAxisHitsPrincipalPoint) {
  PinholeCamera cam = testkit::road_camera();
  const Homography h = camera_homography(cam);
  const double d = cam.height_m / std::tan(cam.pitch_deg * M_PI / 180.0);
  const ImagePoint p = world_to_image(h, {0.0, d});
  EXPECT_NEAR(p.u, cam.cx, 1e-9);
  EXPECT_NEAR(p.v, cam.cy, 1e-9);
  // farther points sit higher in the image; +x is to the right when looking north
  EXPECT_LT(world_to_image(h, {0.0, 2 * d}).v, p.v);
  EXPECT_GT(world_to_image(h, {1.0, d}).u, p.u);
}

TEST(Render, AnchorIsGroundContact) {
  const auto fleet = testkit::sequential_fleet({ConstantSpeed{25.0}, testkit::stop_profile(20.0)});
  const Homography h = testkit::road_homography();
  RenderSettings rs;
  rs.duration_s = testkit::fleet_duration(fleet);
  const auto scene = render_scene(fleet, h, rs);
  ASSERT_EQ(scene.detections.size(), scene.truth.rows.size());
  for (std::size_t i = 0; i < scene.detections.size(); ++i) {
    const ImagePoint a = anchor_point(scene.detections[i].bbox);
    const ImagePoint q = world_to_image(h, scene.truth.rows[i].position);
    EXPECT_LE(std::hypot(a.u - q.u, a.v - q.v), 0.5);
    EXPECT_NEAR(a.u, q.u, 1e-6);
    EXPECT_NEAR(a.v, q.v, 1e-6);
  }
}

TEST(Render, NoisyAnchorRoundTripsThroughBox) {
  const auto fleet = testkit::sequential_fleet(std::vector<SpeedProfile>(20, ConstantSpeed{25.0}));
  RenderSettings rs;
  rs.duration_s = testkit::fleet_duration(fleet);
  rs.noise_sigma_px = 1.0;
  rs.seed = 5;
  const Homography h = testkit::road_homography();
  const auto scene = render_scene(fleet, h, rs);
  double sum = 0.0, sum2 = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < scene.detections.size(); ++i) {
    const auto& b = scene.detections[i].bbox;
    const ImagePoint a = anchor_point(b);
    // the box is rebuilt from the anchor without rounding loss
    EXPECT_EQ(a.u - b.width / 2.0, b.left);
    EXPECT_EQ(a.v - b.height, b.top);
    const ImagePoint q = world_to_image(h, scene.truth.rows[i].position);
    for (double e : {a.u - q.u, a.v - q.v}) {
      sum += e;
      sum2 += e * e;
      ++n;
    }
  }
  const double mean = sum / n, sd = std::sqrt(sum2 / n - mean * mean);
  EXPECT_NEAR(mean, 0.0, 0.15);
  EXPECT_NEAR(sd, 1.0, 0.1);
}

TEST(Render, SortedByFrameThenId) {
  std::vector<SyntheticVehicle> fleet = testkit::sequential_fleet({ConstantSpeed{25.0}, ConstantSpeed{30.0}});
  fleet[1].entry_time_s = 0.5;  // overlap
  fleet[1].start = {3.0, 15.0};
  std::swap(fleet[0], fleet[1]);
  RenderSettings rs;
  rs.duration_s = 20.0;
  const auto scene = render_scene(fleet, testkit::road_homography(), rs);
  EXPECT_TRUE(std::is_sorted(scene.detections.begin(), scene.detections.end(),
                             [](const Detection& a, const Detection& b) {
                               return std::pair(a.frame, a.track_id) < std::pair(b.frame, b.track_id);
                             }));
}

TEST(Render, DeterministicPerSeed) {
  const auto fleet = testkit::sequential_fleet({ConstantSpeed{25.0}, testkit::stop_profile(22.0),
                                                testkit::slow_down_profile(28.0, 7.5)});
  const std::string a = render_csv(fleet, 1.0, 42), b = render_csv(fleet, 1.0, 42);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, render_csv(fleet, 1.0, 43));
  EXPECT_EQ(render_csv(fleet, 0.0, 1), render_csv(fleet, 0.0, 2));
}

TEST(Render, TruthManeuvers) {
  const auto fleet = testkit::sequential_fleet(
      {ConstantSpeed{25.0}, testkit::stop_profile(22.0), testkit::slow_down_profile(28.0, 7.5)});
  RenderSettings rs;
  rs.duration_s = testkit::fleet_duration(fleet) + 5.0;
  rs.approach_zone = testkit::world_polygon(testkit::rectangle(-6, testkit::kZoneNearY, 6, testkit::kZoneFarY));
  const auto scene = render_scene(fleet, testkit::road_homography(), rs);
  ASSERT_EQ(scene.truth.vehicles.size(), 3u);
  EXPECT_EQ(scene.truth.vehicles.at(1).maneuver, ManeuverClass::PassThrough);
  EXPECT_EQ(scene.truth.vehicles.at(2).maneuver, ManeuverClass::StopAndGo);
  EXPECT_EQ(scene.truth.vehicles.at(3).maneuver, ManeuverClass::SlowDown);
  EXPECT_NEAR(*scene.truth.vehicles.at(3).min_zone_speed_mph, 7.5, 1e-9);
  EXPECT_NEAR(scene.truth.vehicles.at(1).mean_speed_mph, 25.0, 1e-9);

  std::ostringstream gt;
  write_ground_truth(gt, scene.truth);
  EXPECT_EQ(gt.str().substr(0, gt.str().find('\n')), "id,frame,world_x_m,world_y_m,speed_mph,maneuver");
  EXPECT_NE(gt.str().find(",stop_and_go\n"), std::string::npos);
}

TEST(Render, RejectsBadSettings) {
  const auto fleet = testkit::sequential_fleet({ConstantSpeed{25.0}});
  RenderSettings rs;
  rs.fps = 0.0;
  EXPECT_THROW(render_scene(fleet, testkit::road_homography(), rs), ConfigError);
  rs.fps = 10.0;
  rs.noise_sigma_px = -1.0;
  EXPECT_THROW(render_scene(fleet, testkit::road_homography(), rs), ConfigError);
  auto bad = fleet;
  bad[0].direction = {1.0, 1.0};
  rs.noise_sigma_px = 0.0;
  EXPECT_THROW(render_scene(bad, testkit::road_homography(), rs), ConfigError);
}
