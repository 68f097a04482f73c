#pragma once

#include <vector>

namespace calmcam {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Simple polygon, implicitly closed. Used for the image-space area of
/// interest and the world-space approach zone.
class Polygon {
 public:
  /// Throws ConfigError if fewer than 3 vertices, non-finite coordinates,
  /// zero area, or self-intersecting edges.
  explicit Polygon(std::vector<Point2> vertices);

  const std::vector<Point2>& vertices() const { return vertices_; }

  /// Even-odd test; points within `boundary_tol` of an edge count as inside.
  bool contains(Point2 p, double boundary_tol = 1e-9) const;

 private:
  std::vector<Point2> vertices_;
};

}  // namespace calmcam
