#pragma once

#include <array>
#include <span>

#include <Eigen/Core>

namespace calmcam {

/// Planar road coordinates in meters.
struct WorldPoint {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const WorldPoint&, const WorldPoint&) = default;
};

/// Image coordinates in pixels (u = column, v = row). Not clamped to the frame.
struct ImagePoint {
  double u = 0.0;
  double v = 0.0;
  friend bool operator==(const ImagePoint&, const ImagePoint&) = default;
};

struct Correspondence {
  WorldPoint world;
  ImagePoint image;
};

/// Projective map from the road plane (meters) to the image (pixels).
///
/// Stored in canonical form: unit Frobenius norm with h33 >= 0 (or, when h33
/// vanishes, the first nonzero entry positive). Any nonzero multiple of a
/// matrix therefore yields the same representative, up to rounding of the
/// multiplication itself; multiples by a signed power of two are bit-identical.
class Homography {
 public:
  /// Canonicalizes `m`. Throws DegenerateConfiguration if `m` is singular.
  explicit Homography(const Eigen::Matrix3d& m);

  /// Row-major h11..h33.
  static Homography from_entries(const std::array<double, 9>& h);
  static Homography identity();

  const Eigen::Matrix3d& matrix() const { return forward_; }
  /// Canonicalized inverse, mapping image to world.
  const Eigen::Matrix3d& inverse_matrix() const { return inverse_; }
  std::array<double, 9> entries() const;

 private:
  Eigen::Matrix3d forward_;
  Eigen::Matrix3d inverse_;
};

/// Canonical representative of the projective class of `m`.
Eigen::Matrix3d canonicalize(const Eigen::Matrix3d& m);

/// Normalized DLT estimate from n >= 4 correspondences (world -> image).
Homography solve_homography(std::span<const Correspondence> correspondences);

ImagePoint world_to_image(const Homography& h, WorldPoint p);
WorldPoint image_to_world(const Homography& h, ImagePoint p);

/// RMS pixel distance between projected world points and observed image points.
double reprojection_rmse(const Homography& h, std::span<const Correspondence> correspondences);

inline constexpr double kAtInfinityEps = 1e-12;

}  // namespace calmcam
