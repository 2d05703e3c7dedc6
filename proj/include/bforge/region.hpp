#pragma once

#include <array>
#include <string>
#include <vector>

#include "bforge/operators.hpp"

namespace bforge {

// Explicit convex set in R^s; the standing surrogate for the essential
// numerical range of the (infinite) model operator. A disc with ambient 1 is
// a segment; with ambient s > 2 it is the Euclidean ball.
struct ConvexRegion {
  enum class Shape { Disc, Polygon, Halfspaces };

  Shape shape = Shape::Disc;
  int ambient = 2;

  std::vector<double> center;  // disc
  double radius = 0.0;

  std::vector<std::array<double, 2>> vertices;  // polygon, ambient 2

  struct Halfspace {
    std::vector<double> normal;
    double offset = 0.0;  // region: <normal, x> <= offset
  };
  std::vector<Halfspace> rows;

  // we_model tag: margin the declared region was validated with.
  double margin = 0.0;
  bool validated = false;
};

ConvexRegion disc_region(const std::vector<double>& center, double radius);
ConvexRegion polygon_region(const std::vector<std::array<double, 2>>& vertices);
ConvexRegion halfspace_region(const std::vector<ConvexRegion::Halfspace>& rows);

// Affine hull a + span(basis) of the joint range, together with the null
// relations alpha_0 I + sum_j alpha_j S_j = 0 that cut it out.
struct AffineHull {
  int ambient = 0;
  std::vector<double> offset;
  std::vector<std::vector<double>> basis;      // orthonormal direction rows
  std::vector<std::vector<double>> relations;  // rows (alpha_0, ..., alpha_s)

  int dim() const { return static_cast<int>(basis.size()); }
};

// Distance from an interior point to the complement of the region, relative
// to the affine subspace when one is given. Returns 0 when the point is not
// in the (relative) interior.
double dist_to_complement(const std::vector<double>& lambda,
                          const ConvexRegion& region,
                          const AffineHull* hull = nullptr);

bool region_contains(const ConvexRegion& region, const std::vector<double>& p,
                     double slack = 0.0);

// Euclidean projection onto the region (exact for disc/polygon; cyclic
// projection for halfspace intersections).
std::vector<double> nearest_point(const ConvexRegion& region,
                                  const std::vector<double>& p);

std::vector<double> region_center(const ConvexRegion& region);

}  // namespace bforge
