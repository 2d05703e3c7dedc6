#include "bforge/numrange.hpp"

#include <algorithm>
#include <cmath>

#include "bforge/linalg.hpp"

namespace bforge {

namespace {

Matrix direction_combination(const SelfAdjointTuple& s, const std::vector<double>& u) {
  if (static_cast<int>(u.size()) != s.s)
    fail(ErrorKind::Input, "direction dimension mismatch");
  Matrix m(s.dim, s.dim);
  for (int j = 0; j < s.s; ++j) {
    if (u[j] == 0.0) continue;
    for (size_t i = 0; i < m.a.size(); ++i) m.a[i] += u[j] * s.parts[j].a[i];
  }
  return m;
}

double vnorm(const std::vector<double>& v) {
  double t = 0.0;
  for (double x : v) t += x * x;
  return std::sqrt(t);
}

// 2D convex hull, monotone chain; returns CCW vertices.
std::vector<std::array<double, 2>> hull2d(std::vector<std::array<double, 2>> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const size_t n = pts.size();
  if (n < 3) return pts;
  auto cross = [](const std::array<double, 2>& o, const std::array<double, 2>& a,
                  const std::array<double, 2>& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
  };
  std::vector<std::array<double, 2>> h(2 * n);
  size_t k = 0;
  for (size_t i = 0; i < n; ++i) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  const size_t lower = k + 1;
  for (size_t i = n - 1; i-- > 0;) {
    while (k >= lower && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return h;
}

bool point_in_hull(const std::vector<std::array<double, 2>>& hull, double x,
                   double y, double slack) {
  const size_t n = hull.size();
  if (n < 3) {
    if (n == 0) return false;
    if (n == 1) return std::hypot(x - hull[0][0], y - hull[0][1]) <= slack;
    // segment
    const auto& a = hull[0];
    const auto& b = hull[1];
    const double ex = b[0] - a[0], ey = b[1] - a[1];
    const double l2 = ex * ex + ey * ey;
    double t = l2 == 0.0 ? 0.0 : ((x - a[0]) * ex + (y - a[1]) * ey) / l2;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(x - a[0] - t * ex, y - a[1] - t * ey) <= slack;
  }
  for (size_t i = 0; i < n; ++i) {
    const auto& a = hull[i];
    const auto& b = hull[(i + 1) % n];
    const double cross = (b[0] - a[0]) * (y - a[1]) - (b[1] - a[1]) * (x - a[0]);
    if (cross < -slack) return false;
  }
  return true;
}

std::vector<std::array<double, 2>> polytope_vertices_2d(
    const std::vector<ConvexRegion::Halfspace>& rows) {
  std::vector<std::array<double, 2>> pts;
  const size_t n = rows.size();
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j) {
      const double a1 = rows[i].normal[0], b1 = rows[i].normal[1], c1 = rows[i].offset;
      const double a2 = rows[j].normal[0], b2 = rows[j].normal[1], c2 = rows[j].offset;
      const double det = a1 * b2 - a2 * b1;
      if (std::abs(det) < 1e-14) continue;
      const double x = (c1 * b2 - c2 * b1) / det;
      const double y = (a1 * c2 - a2 * c1) / det;
      bool feasible = true;
      for (const auto& h : rows)
        if (h.normal[0] * x + h.normal[1] * y > h.offset + 1e-9) feasible = false;
      if (feasible) pts.push_back({x, y});
    }
  return pts;
}

}  // namespace

SupportPoint support_point(const SelfAdjointTuple& s, const std::vector<double>& u) {
  const double un = vnorm(u);
  if (std::abs(un - 1.0) > 1e-8)
    fail(ErrorKind::Input, "support_point: direction must be a unit vector");
  Matrix m = direction_combination(s, u);
  auto [value, x] = heig_extreme(m, true);
  return {value, std::move(x)};
}

std::vector<BoundarySample> numrange_boundary(const Operator& op, int samples) {
  if (samples < 3) fail(ErrorKind::Input, "numrange_boundary: need at least 3 samples");
  SelfAdjointTuple s = hermitian_parts(single(op));
  std::vector<BoundarySample> out;
  out.reserve(samples);
  for (int k = 0; k < samples; ++k) {
    const double theta = 2.0 * M_PI * k / samples;
    SupportPoint sp = support_point(s, {std::cos(theta), std::sin(theta)});
    BoundarySample b;
    b.theta = theta;
    b.value = sp.value;
    b.vertex = inner(matvec(op.mat, sp.witness), sp.witness);
    b.witness = std::move(sp.witness);
    out.push_back(std::move(b));
  }
  return out;
}

AffineHull affine_hull(const SelfAdjointTuple& s) {
  const int p = s.s + 1;  // {I, S_1, ..., S_s}
  // Gram under the trace inner product; real symmetric since all are Hermitian.
  Matrix gram(p, p);
  auto traceprod = [&](int a, int b) {
    // tr(B_a B_b) with B_0 = I
    if (a == 0 && b == 0) return static_cast<double>(s.dim);
    const Matrix& x = s.parts[(a == 0 ? b : a) - 1];
    if (a == 0 || b == 0) {
      cd t = 0.0;
      for (int i = 0; i < s.dim; ++i) t += x(i, i);
      return t.real();
    }
    const Matrix& y = s.parts[b - 1];
    cd t = 0.0;
    for (int j = 0; j < s.dim; ++j)
      for (int i = 0; i < s.dim; ++i) t += x(i, j) * y(j, i);
    return t.real();
  };
  for (int a = 0; a < p; ++a)
    for (int b = a; b < p; ++b) {
      const double v = traceprod(a, b);
      gram(a, b) = v;
      gram(b, a) = v;
    }

  EigResult eg = heig(gram);
  const double gscale = std::max(1.0, eg.values.empty() ? 0.0 : eg.values.back());
  double opscale = 1.0;
  for (const auto& part : s.parts) opscale = std::max(opscale, max_abs(part) * s.dim);

  AffineHull hull;
  hull.ambient = s.s;
  for (int k = 0; k < p; ++k) {
    if (eg.values[k] > 1e-12 * gscale) continue;
    std::vector<double> alpha(p);
    for (int i = 0; i < p; ++i) alpha[i] = eg.vectors(i, k).real();
    double an = vnorm(alpha);
    if (an == 0.0) continue;
    for (auto& a : alpha) a /= an;
    for (double a : alpha)
      if (std::abs(a) > 1e-8) {
        if (a < 0.0)
          for (auto& t : alpha) t = -t;
        break;
      }
    // verify the relation in operator norm before accepting it
    Matrix v(s.dim, s.dim);
    for (int i = 0; i < s.dim; ++i) v(i, i) = alpha[0];
    for (int j = 1; j < p; ++j)
      for (size_t i = 0; i < v.a.size(); ++i) v.a[i] += alpha[j] * s.parts[j - 1].a[i];
    if (opnorm(v) > 1e-10 * opscale) continue;
    hull.relations.push_back(std::move(alpha));
  }

  // direction space: orthogonal complement of the relation normals in R^s
  std::vector<std::vector<double>> normals;
  for (const auto& r : hull.relations)
    normals.emplace_back(r.begin() + 1, r.end());
  auto project_out = [&](std::vector<double>& v, const std::vector<std::vector<double>>& bs) {
    for (const auto& b : bs) {
      double c = 0.0, bn = 0.0;
      for (size_t i = 0; i < v.size(); ++i) {
        c += v[i] * b[i];
        bn += b[i] * b[i];
      }
      if (bn == 0.0) continue;
      for (size_t i = 0; i < v.size(); ++i) v[i] -= (c / bn) * b[i];
    }
  };
  std::vector<std::vector<double>> nbasis;
  for (auto n : normals) {
    project_out(n, nbasis);
    double nn = vnorm(n);
    if (nn > 1e-12) {
      for (auto& x : n) x /= nn;
      nbasis.push_back(std::move(n));
    }
  }
  for (int k = 0; k < s.s; ++k) {
    std::vector<double> e(s.s, 0.0);
    e[k] = 1.0;
    project_out(e, nbasis);
    project_out(e, hull.basis);
    double en = vnorm(e);
    if (en > 1e-8) {
      for (auto& x : e) x /= en;
      hull.basis.push_back(std::move(e));
    }
  }

  // offset: least-norm point satisfying all relations
  hull.offset.assign(s.s, 0.0);
  const int r = static_cast<int>(hull.relations.size());
  if (r > 0) {
    // a = A^T (A A^T)^{-1} (-alpha_0), rows of A the relation normals
    std::vector<std::vector<double>> aat(r, std::vector<double>(r, 0.0));
    std::vector<double> rhs(r);
    for (int i = 0; i < r; ++i) {
      rhs[i] = -hull.relations[i][0];
      for (int j = 0; j < r; ++j) {
        double t = 0.0;
        for (int k = 0; k < s.s; ++k)
          t += hull.relations[i][k + 1] * hull.relations[j][k + 1];
        aat[i][j] = t;
      }
    }
    // small Gaussian elimination with partial pivoting
    for (int c = 0; c < r; ++c) {
      int piv = c;
      for (int i = c + 1; i < r; ++i)
        if (std::abs(aat[i][c]) > std::abs(aat[piv][c])) piv = i;
      std::swap(aat[c], aat[piv]);
      std::swap(rhs[c], rhs[piv]);
      if (std::abs(aat[c][c]) < 1e-14)
        fail(ErrorKind::Internal, "affine_hull: dependent relations");
      for (int i = c + 1; i < r; ++i) {
        const double f = aat[i][c] / aat[c][c];
        for (int j = c; j < r; ++j) aat[i][j] -= f * aat[c][j];
        rhs[i] -= f * rhs[c];
      }
    }
    std::vector<double> y(r);
    for (int i = r - 1; i >= 0; --i) {
      double t = rhs[i];
      for (int j = i + 1; j < r; ++j) t -= aat[i][j] * y[j];
      y[i] = t / aat[i][i];
    }
    for (int i = 0; i < r; ++i)
      for (int k = 0; k < s.s; ++k) hull.offset[k] += y[i] * hull.relations[i][k + 1];
  }
  return hull;
}

ConvexRegion we_model(const ConvexRegion& declared, const Operator& op,
                      double margin, int samples) {
  if (margin < 0.0) fail(ErrorKind::Input, "we_model: margin must be >= 0");
  SelfAdjointTuple s = hermitian_parts(single(op));
  AffineHull hull = affine_hull(s);
  const int h = hull.dim();

  auto reject = [&](const std::string& why) {
    fail(ErrorKind::Model, "we_model: declared region inconsistent with the truncation (" + why + ")");
  };

  auto off_hull = [&](const std::vector<double>& p) {
    std::vector<double> rel{p[0] - hull.offset[0], p[1] - hull.offset[1]};
    double r2 = rel[0] * rel[0] + rel[1] * rel[1];
    for (const auto& b : hull.basis) {
      const double c = rel[0] * b[0] + rel[1] * b[1];
      r2 -= c * c;
    }
    return std::sqrt(std::max(0.0, r2));
  };

  if (declared.ambient != 2)
    fail(ErrorKind::Input, "we_model: only ambient dimension 2 is supported");

  if (h >= 2) {
    std::vector<BoundarySample> bd = numrange_boundary(op, samples);
    std::vector<std::array<double, 2>> pts;
    pts.reserve(bd.size());
    for (const auto& b : bd) pts.push_back({b.vertex.real(), b.vertex.imag()});
    auto hl = hull2d(pts);
    if (hl.size() < 3) reject("sampled range is degenerate");
    const size_t nh = hl.size();
    switch (declared.shape) {
      case ConvexRegion::Shape::Disc: {
        const double r = declared.radius - margin;
        if (r < 0.0) reject("margin exceeds the disc radius");
        for (size_t i = 0; i < nh; ++i) {
          const auto& a = hl[i];
          const auto& b = hl[(i + 1) % nh];
          double nx = b[1] - a[1], ny = a[0] - b[0];  // outward for CCW
          const double nn = std::hypot(nx, ny);
          if (nn == 0.0) continue;
          nx /= nn;
          ny /= nn;
          const double support = nx * a[0] + ny * a[1];
          if (nx * declared.center[0] + ny * declared.center[1] + r > support + 1e-12)
            reject("disc escapes the sampled range");
        }
        break;
      }
      case ConvexRegion::Shape::Polygon: {
        // erode by pulling each vertex toward the centroid is wrong for long
        // polygons; move each edge inward instead and re-intersect.
        std::vector<ConvexRegion::Halfspace> rows;
        const size_t n = declared.vertices.size();
        for (size_t i = 0; i < n; ++i) {
          const auto& a = declared.vertices[i];
          const auto& b = declared.vertices[(i + 1) % n];
          double nx = b[1] - a[1], ny = a[0] - b[0];
          const double nn = std::hypot(nx, ny);
          if (nn == 0.0) continue;
          nx /= nn;
          ny /= nn;
          rows.push_back({{nx, ny}, nx * a[0] + ny * a[1] - margin});
        }
        auto verts = polytope_vertices_2d(rows);
        if (verts.empty()) reject("margin erodes the polygon to nothing");
        for (const auto& v : verts)
          if (!point_in_hull(hl, v[0], v[1], 1e-12)) reject("polygon escapes the sampled range");
        break;
      }
      case ConvexRegion::Shape::Halfspaces: {
        auto rows = declared.rows;
        for (auto& hrow : rows) {
          const double nn = std::hypot(hrow.normal[0], hrow.normal[1]);
          hrow.offset -= margin * nn;
        }
        auto verts = polytope_vertices_2d(rows);
        if (verts.empty()) reject("margin erodes the region to nothing");
        for (const auto& v : verts)
          if (!point_in_hull(hl, v[0], v[1], 1e-12)) reject("region escapes the sampled range");
        break;
      }
    }
  } else if (h == 1) {
    // range lives on a line; validate within the hull coordinate
    const auto& d = hull.basis[0];
    SupportPoint hi = support_point(s, {d[0], d[1]});
    SupportPoint lo = support_point(s, {-d[0], -d[1]});
    const double wlo = -lo.value, whi = hi.value;
    double clo = 0.0, chi = 0.0;
    switch (declared.shape) {
      case ConvexRegion::Shape::Disc: {
        if (off_hull(declared.center) > 1e-9) reject("region center is off the range line");
        const double c = (declared.center[0] - hull.offset[0]) * d[0] +
                         (declared.center[1] - hull.offset[1]) * d[1];
        clo = c - declared.radius;
        chi = c + declared.radius;
        break;
      }
      case ConvexRegion::Shape::Polygon:
      case ConvexRegion::Shape::Halfspaces: {
        reject("only disc (segment) regions are supported on a line hull");
        break;
      }
    }
    if (clo + margin < wlo - 1e-12 || chi - margin > whi + 1e-12)
      reject("segment escapes the sampled range");
  } else {
    // all parts are scalars; the range is one point
    if (declared.shape != ConvexRegion::Shape::Disc || declared.radius > margin)
      reject("range of the truncation is a single point");
    if (off_hull(declared.center) > 1e-9 ||
        std::hypot(declared.center[0] - hull.offset[0],
                   declared.center[1] - hull.offset[1]) > 1e-9)
      reject("region center differs from the point range");
  }

  ConvexRegion tagged = declared;
  tagged.margin = margin;
  tagged.validated = true;
  return tagged;
}

}  // namespace bforge
