#include "calmcam/geometry.hpp"

#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "calmcam/errors.hpp"

namespace calmcam {
namespace {

constexpr double kRankTol = 1e-10;
constexpr double kSingularTol = 1e-13;

// Similarity that moves the centroid to the origin and the mean distance to sqrt(2).
Eigen::Matrix3d hartley_transform(const std::vector<Eigen::Vector2d>& pts) {
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  for (const auto& p : pts) centroid += p;
  centroid /= static_cast<double>(pts.size());

  double mean_dist = 0.0;
  for (const auto& p : pts) mean_dist += (p - centroid).norm();
  mean_dist /= static_cast<double>(pts.size());
  if (!(mean_dist > 0.0)) {
    std::vector<std::size_t> all(pts.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    throw DegenerateConfiguration("all correspondence points coincide", all);
  }

  const double s = std::sqrt(2.0) / mean_dist;
  Eigen::Matrix3d t;
  t << s, 0.0, -s * centroid.x(),
       0.0, s, -s * centroid.y(),
       0.0, 0.0, 1.0;
  return t;
}

Eigen::Vector2d apply(const Eigen::Matrix3d& t, const Eigen::Vector2d& p) {
  const Eigen::Vector3d q = t * Eigen::Vector3d(p.x(), p.y(), 1.0);
  return q.head<2>() / q.z();
}

// Indices involved in coincident pairs or (for minimal sets) collinear triples.
// `pts` must already be Hartley-normalized so tolerances are scale free.
std::set<std::size_t> degenerate_indices(const std::vector<Eigen::Vector2d>& pts) {
  constexpr double kTol = 1e-9;
  std::set<std::size_t> bad;
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if ((pts[i] - pts[j]).norm() < kTol) {
        bad.insert(i);
        bad.insert(j);
      }
    }
  }
  bool all_collinear = n >= 3;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      for (std::size_t k = j + 1; k < n; ++k) {
        const Eigen::Vector2d a = pts[j] - pts[i];
        const Eigen::Vector2d b = pts[k] - pts[i];
        const bool collinear = std::abs(a.x() * b.y() - a.y() * b.x()) < kTol;
        if (!collinear) {
          all_collinear = false;
        } else if (n == 4) {
          bad.insert({i, j, k});
        }
      }
    }
  }
  if (all_collinear) {
    for (std::size_t i = 0; i < n; ++i) bad.insert(i);
  }
  return bad;
}

double condition_ratio(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m);
  const auto& s = svd.singularValues();
  return s(0) > 0.0 ? s(2) / s(0) : 0.0;
}

}  // namespace

Eigen::Matrix3d canonicalize(const Eigen::Matrix3d& m) {
  if (!m.allFinite()) throw DegenerateConfiguration("homography has non-finite entries");
  const double norm = m.norm();
  if (!(norm > 0.0)) throw DegenerateConfiguration("homography is the zero matrix");
  Eigen::Matrix3d c = m / norm;

  double sign_ref = c(2, 2);
  if (std::abs(sign_ref) < kAtInfinityEps) {
    sign_ref = 0.0;
    for (int i = 0; i < 9 && sign_ref == 0.0; ++i) {
      const double e = c(i / 3, i % 3);
      if (std::abs(e) > kAtInfinityEps) sign_ref = e;
    }
  }
  if (sign_ref < 0.0) c = -c;
  return c;
}

Homography::Homography(const Eigen::Matrix3d& m) : forward_(canonicalize(m)) {
  if (condition_ratio(forward_) < kSingularTol) {
    throw DegenerateConfiguration("homography is singular");
  }
  // Scaled to a unit last entry when possible so affine maps invert exactly.
  inverse_ = canonicalize(forward_.inverse());
  if (std::abs(inverse_(2, 2)) > kAtInfinityEps) inverse_ /= inverse_(2, 2);
}

Homography Homography::from_entries(const std::array<double, 9>& h) {
  Eigen::Matrix3d m;
  m << h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], h[8];
  return Homography(m);
}

Homography Homography::identity() { return Homography(Eigen::Matrix3d::Identity()); }

std::array<double, 9> Homography::entries() const {
  std::array<double, 9> out{};
  for (int i = 0; i < 9; ++i) out[static_cast<std::size_t>(i)] = forward_(i / 3, i % 3);
  return out;
}

Homography solve_homography(std::span<const Correspondence> correspondences) {
  const std::size_t n = correspondences.size();
  if (n < 4) throw TooFewPoints(n);

  std::vector<Eigen::Vector2d> world(n);
  std::vector<Eigen::Vector2d> image(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = correspondences[i];
    world[i] = {c.world.x, c.world.y};
    image[i] = {c.image.u, c.image.v};
    if (!world[i].allFinite() || !image[i].allFinite()) {
      throw DegenerateConfiguration("correspondence " + std::to_string(i) + " is not finite", {i});
    }
  }

  const Eigen::Matrix3d t_world = hartley_transform(world);
  const Eigen::Matrix3d t_image = hartley_transform(image);
  for (std::size_t i = 0; i < n; ++i) {
    world[i] = apply(t_world, world[i]);
    image[i] = apply(t_image, image[i]);
  }

  auto fail = [&](const std::string& why) {
    std::set<std::size_t> bad = degenerate_indices(world);
    bad.merge(degenerate_indices(image));
    throw DegenerateConfiguration(why, std::vector<std::size_t>(bad.begin(), bad.end()));
  };

  // Minimal sets with three collinear points admit no proper homography.
  if (n == 4 && (!degenerate_indices(world).empty() || !degenerate_indices(image).empty())) {
    fail("collinear or duplicate correspondences");
  }

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(2 * n), 9);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = world[i].x(), y = world[i].y();
    const double u = image[i].x(), v = image[i].y();
    const auto r = static_cast<Eigen::Index>(2 * i);
    a.row(r) << -x, -y, -1.0, 0.0, 0.0, 0.0, u * x, u * y, u;
    a.row(r + 1) << 0.0, 0.0, 0.0, -x, -y, -1.0, v * x, v * y, v;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv(7) <= kRankTol * sv(0)) fail("DLT system is rank deficient");

  const Eigen::VectorXd h = svd.matrixV().col(8);
  Eigen::Matrix3d normalized;
  normalized << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  if (condition_ratio(normalized) < kRankTol) fail("estimated homography is singular");

  return Homography(t_image.inverse() * normalized * t_world);
}

ImagePoint world_to_image(const Homography& h, WorldPoint p) {
  const Eigen::Vector3d q = h.matrix() * Eigen::Vector3d(p.x, p.y, 1.0);
  if (std::abs(q.z()) < kAtInfinityEps) {
    throw AtInfinity("world point (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                     ") maps to infinity");
  }
  return {q.x() / q.z(), q.y() / q.z()};
}

WorldPoint image_to_world(const Homography& h, ImagePoint p) {
  const Eigen::Vector3d q = h.inverse_matrix() * Eigen::Vector3d(p.u, p.v, 1.0);
  if (std::abs(q.z()) < kAtInfinityEps) {
    throw AtInfinity("image point (" + std::to_string(p.u) + ", " + std::to_string(p.v) +
                     ") lies on the horizon");
  }
  return {q.x() / q.z(), q.y() / q.z()};
}

double reprojection_rmse(const Homography& h, std::span<const Correspondence> correspondences) {
  if (correspondences.empty()) throw EmptyInput("reprojection_rmse: no correspondences");
  double sum_sq = 0.0;
  for (const auto& c : correspondences) {
    const ImagePoint p = world_to_image(h, c.world);
    const double du = p.u - c.image.u;
    const double dv = p.v - c.image.v;
    sum_sq += du * du + dv * dv;
  }
  return std::sqrt(sum_sq / static_cast<double>(correspondences.size()));
}

}  // namespace calmcam
