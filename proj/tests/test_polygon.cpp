#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "calmcam/errors.hpp"
#include "calmcam/polygon.hpp"
#include "support/fixtures.hpp"

using namespace calmcam;

TEST(Polygon, RejectsInvalid) {
  EXPECT_THROW(Polygon({{0, 0}, {1, 0}}), ConfigError);
  EXPECT_THROW(Polygon({{0, 0}, {1, 1}, {2, 2}}), ConfigError);                 // zero area
  EXPECT_THROW(Polygon({{0, 0}, {2, 2}, {2, 0}, {0, 2}}), ConfigError);         // bow tie
  EXPECT_THROW(Polygon({{0, 0}, {1, 0}, {NAN, 1}}), ConfigError);
}

TEST(Polygon, BoundaryIsInside) {
  const Polygon sq({{0, 0}, {10, 0}, {10, 10}, {0, 10}});
  EXPECT_TRUE(sq.contains({5, 5}));
  EXPECT_TRUE(sq.contains({0, 5}));
  EXPECT_TRUE(sq.contains({10, 10}));
  EXPECT_TRUE(sq.contains({5, 10 + 1e-10}));
  EXPECT_FALSE(sq.contains({5, 10 + 1e-6}));
  EXPECT_FALSE(sq.contains({-1, 5}));
}

TEST(Polygon, ConcaveAgreesWithWindingOracle) {
  const std::vector<Point2> v{{0, 0}, {10, 0}, {10, 10}, {5, 3}, {0, 10}};
  const Polygon p(v);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> c(-2, 12);
  for (int i = 0; i < 20000; ++i) {
    const Point2 q{c(rng), c(rng)};
    ASSERT_EQ(p.contains(q, 0.0), testkit::oracle_inside(v, q)) << q.x << "," << q.y;
  }
}
