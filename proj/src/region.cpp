#include "bforge/region.hpp"

#include <algorithm>
#include <cmath>

namespace bforge {

namespace {

double dot(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double nrm(const std::vector<double>& x) { return std::sqrt(dot(x, x)); }

std::vector<double> sub(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> r(x.size());
  for (size_t i = 0; i < x.size(); ++i) r[i] = x[i] - y[i];
  return r;
}

// Convex polygons are stored counterclockwise; enforce at construction.
double polygon_area2(const std::vector<std::array<double, 2>>& v) {
  double a = 0.0;
  const size_t n = v.size();
  for (size_t i = 0; i < n; ++i) {
    const auto& p = v[i];
    const auto& q = v[(i + 1) % n];
    a += p[0] * q[1] - q[0] * p[1];
  }
  return a;
}

// Signed min inward edge distance for a CCW convex polygon; negative outside.
double polygon_signed_distance(const std::vector<std::array<double, 2>>& v,
                               double x, double y) {
  const size_t n = v.size();
  double best = 1e300;
  for (size_t i = 0; i < n; ++i) {
    const auto& p = v[i];
    const auto& q = v[(i + 1) % n];
    const double ex = q[0] - p[0], ey = q[1] - p[1];
    const double len = std::hypot(ex, ey);
    if (len == 0.0) continue;
    // inward normal for a CCW polygon is (-ey, ex)/len
    const double d = (-(ey) * (x - p[0]) + ex * (y - p[1])) / len;
    best = std::min(best, d);
  }
  return best == 1e300 ? 0.0 : best;
}

std::vector<double> project_to_hull(const std::vector<double>& p,
                                    const AffineHull& hull,
                                    double* out_residual) {
  std::vector<double> rel = sub(p, hull.offset);
  std::vector<double> coords(hull.basis.size(), 0.0);
  std::vector<double> back = hull.offset;
  for (size_t k = 0; k < hull.basis.size(); ++k) {
    coords[k] = dot(rel, hull.basis[k]);
    for (size_t i = 0; i < back.size(); ++i) back[i] += coords[k] * hull.basis[k][i];
  }
  if (out_residual) *out_residual = nrm(sub(p, back));
  return coords;
}

}  // namespace

ConvexRegion disc_region(const std::vector<double>& center, double radius) {
  if (center.empty()) fail(ErrorKind::Input, "disc: empty center");
  if (!(radius >= 0.0)) fail(ErrorKind::Input, "disc: radius must be >= 0");
  ConvexRegion r;
  r.shape = ConvexRegion::Shape::Disc;
  r.ambient = static_cast<int>(center.size());
  r.center = center;
  r.radius = radius;
  return r;
}

ConvexRegion polygon_region(const std::vector<std::array<double, 2>>& vertices) {
  if (vertices.size() < 3) fail(ErrorKind::Input, "polygon: need at least 3 vertices");
  ConvexRegion r;
  r.shape = ConvexRegion::Shape::Polygon;
  r.ambient = 2;
  r.vertices = vertices;
  if (polygon_area2(r.vertices) < 0.0)
    std::reverse(r.vertices.begin(), r.vertices.end());
  // convexity check: every turn non-right
  const size_t n = r.vertices.size();
  for (size_t i = 0; i < n; ++i) {
    const auto& a = r.vertices[i];
    const auto& b = r.vertices[(i + 1) % n];
    const auto& c = r.vertices[(i + 2) % n];
    const double cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
    if (cross < -1e-12) fail(ErrorKind::Input, "polygon: vertices are not convex");
  }
  return r;
}

ConvexRegion halfspace_region(const std::vector<ConvexRegion::Halfspace>& rows) {
  if (rows.empty()) fail(ErrorKind::Input, "halfspaces: empty row list");
  ConvexRegion r;
  r.shape = ConvexRegion::Shape::Halfspaces;
  r.ambient = static_cast<int>(rows[0].normal.size());
  for (const auto& h : rows) {
    if (static_cast<int>(h.normal.size()) != r.ambient)
      fail(ErrorKind::Input, "halfspaces: inconsistent normal dimensions");
    if (nrm(h.normal) == 0.0) fail(ErrorKind::Input, "halfspaces: zero normal");
  }
  r.rows = rows;
  // necessary boundedness probe: every coordinate direction must be cut
  for (int i = 0; i < r.ambient; ++i) {
    for (double sgn : {1.0, -1.0}) {
      bool cut = false;
      for (const auto& h : rows)
        if (sgn * h.normal[i] > 1e-12) cut = true;
      if (!cut) fail(ErrorKind::Input, "halfspaces: region is unbounded");
    }
  }
  return r;
}

bool region_contains(const ConvexRegion& region, const std::vector<double>& p,
                     double slack) {
  switch (region.shape) {
    case ConvexRegion::Shape::Disc:
      return nrm(sub(p, region.center)) <= region.radius + slack;
    case ConvexRegion::Shape::Polygon:
      return polygon_signed_distance(region.vertices, p[0], p[1]) >= -slack;
    case ConvexRegion::Shape::Halfspaces: {
      for (const auto& h : region.rows)
        if (dot(h.normal, p) > h.offset + slack * nrm(h.normal)) return false;
      return true;
    }
  }
  return false;
}

double dist_to_complement(const std::vector<double>& lambda,
                          const ConvexRegion& region, const AffineHull* hull) {
  if (static_cast<int>(lambda.size()) != region.ambient)
    fail(ErrorKind::Input, "dist_to_complement: dimension mismatch");
  if (hull) {
    double resid = 0.0;
    project_to_hull(lambda, *hull, &resid);
    if (resid > 1e-9)
      fail(ErrorKind::Geometry, "dist_to_complement: point is off the affine hull");
  }
  switch (region.shape) {
    case ConvexRegion::Shape::Disc:
      return std::max(0.0, region.radius - nrm(sub(lambda, region.center)));
    case ConvexRegion::Shape::Polygon:
      return std::max(0.0, polygon_signed_distance(region.vertices, lambda[0], lambda[1]));
    case ConvexRegion::Shape::Halfspaces: {
      double best = 1e300;
      for (const auto& h : region.rows) {
        double n = nrm(h.normal);
        double eff = n;
        if (hull) {
          // component of the normal inside the hull's direction space
          double s2 = 0.0;
          for (const auto& b : hull->basis) {
            const double c = dot(h.normal, b);
            s2 += c * c;
          }
          eff = std::sqrt(s2);
        }
        const double gap = h.offset - dot(h.normal, lambda);
        if (eff <= 1e-14 * std::max(1.0, n)) {
          if (gap < 0.0) return 0.0;  // violated but uncuttable inside M
          continue;
        }
        best = std::min(best, gap / eff);
      }
      return std::max(0.0, best == 1e300 ? 0.0 : best);
    }
  }
  return 0.0;
}

std::vector<double> nearest_point(const ConvexRegion& region,
                                  const std::vector<double>& p) {
  switch (region.shape) {
    case ConvexRegion::Shape::Disc: {
      std::vector<double> d = sub(p, region.center);
      const double n = nrm(d);
      if (n <= region.radius) return p;
      std::vector<double> r = region.center;
      const double f = region.radius / n;
      for (size_t i = 0; i < r.size(); ++i) r[i] += f * d[i];
      return r;
    }
    case ConvexRegion::Shape::Polygon: {
      if (polygon_signed_distance(region.vertices, p[0], p[1]) >= 0.0) return p;
      double bx = region.vertices[0][0], by = region.vertices[0][1];
      double best = 1e300;
      const size_t n = region.vertices.size();
      for (size_t i = 0; i < n; ++i) {
        const auto& a = region.vertices[i];
        const auto& b = region.vertices[(i + 1) % n];
        const double ex = b[0] - a[0], ey = b[1] - a[1];
        const double l2 = ex * ex + ey * ey;
        double t = l2 == 0.0 ? 0.0 : ((p[0] - a[0]) * ex + (p[1] - a[1]) * ey) / l2;
        t = std::clamp(t, 0.0, 1.0);
        const double qx = a[0] + t * ex, qy = a[1] + t * ey;
        const double d = std::hypot(p[0] - qx, p[1] - qy);
        if (d < best) {
          best = d;
          bx = qx;
          by = qy;
        }
      }
      return {bx, by};
    }
    case ConvexRegion::Shape::Halfspaces: {
      // cyclic projection; converges for intersections of halfspaces
      std::vector<double> x = p;
      for (int it = 0; it < 256; ++it) {
        double worst = 0.0;
        for (const auto& h : region.rows) {
          const double n2 = dot(h.normal, h.normal);
          const double viol = dot(h.normal, x) - h.offset;
          if (viol > 0.0) {
            worst = std::max(worst, viol / std::sqrt(n2));
            for (size_t i = 0; i < x.size(); ++i) x[i] -= viol * h.normal[i] / n2;
          }
        }
        if (worst <= 1e-13) break;
      }
      return x;
    }
  }
  return p;
}

std::vector<double> region_center(const ConvexRegion& region) {
  switch (region.shape) {
    case ConvexRegion::Shape::Disc:
      return region.center;
    case ConvexRegion::Shape::Polygon: {
      std::vector<double> c{0.0, 0.0};
      for (const auto& v : region.vertices) {
        c[0] += v[0];
        c[1] += v[1];
      }
      c[0] /= static_cast<double>(region.vertices.size());
      c[1] /= static_cast<double>(region.vertices.size());
      return c;
    }
    case ConvexRegion::Shape::Halfspaces: {
      // Chebyshev-ish center by cyclic projection from the origin
      std::vector<double> c(region.ambient, 0.0);
      return nearest_point(region, c);
    }
  }
  return {};
}

}  // namespace bforge
