#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bforge/linalg.hpp"
#include "bforge/numrange.hpp"

using namespace bforge;

TEST_CASE("support point of diag(0,1) in direction +1") {
  Operator d = make_diagonal({cd(0.0), cd(1.0)});
  SelfAdjointTuple s = make_selfadjoint_tuple({hermitian_average(d.mat)});
  SupportPoint sp = support_point(s, {1.0});
  CHECK(sp.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(sp.witness[1]) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("nilpotent block has constant support value 1/2 in every direction") {
  Matrix m(2, 2);
  m(0, 1) = 1.0;
  SelfAdjointTuple s = hermitian_parts(single(m));
  for (int k = 0; k < 12; ++k) {
    const double th = 2.0 * M_PI * k / 12;
    SupportPoint sp = support_point(s, {std::cos(th), std::sin(th)});
    CHECK(sp.value == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("pair support point for (diag(0,1), diag(1,0)) in direction (1,0)") {
  Operator a = make_diagonal({cd(0.0), cd(1.0)});
  Operator b = make_diagonal({cd(1.0), cd(0.0)});
  SelfAdjointTuple s = make_selfadjoint_tuple({a.mat, b.mat});
  SupportPoint sp = support_point(s, {1.0, 0.0});
  CHECK(sp.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(sp.witness[1]) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("boundary of a hermitian operator is the segment [0,1]") {
  Operator d = make_diagonal({cd(0.0), cd(1.0)});
  auto bd = numrange_boundary(d, 16);
  for (const auto& b : bd) {
    CHECK(std::abs(b.vertex.imag()) < 1e-12);
    CHECK(b.vertex.real() > -1e-12);
    CHECK(b.vertex.real() < 1.0 + 1e-12);
  }
}

TEST_CASE("every boundary vertex is attained by its stored witness") {
  Operator s = make_shift(24);
  auto bd = numrange_boundary(s, 36);
  for (const auto& b : bd) {
    const cd again = inner(matvec(s.mat, b.witness), b.witness);
    CHECK(std::abs(again - b.vertex) < 1e-10);
  }
}

TEST_CASE("shift boundary stays inside the disc of radius cos(pi/(n+1))") {
  Operator s = make_shift(64);
  const double r = std::cos(M_PI / 65.0);
  auto bd = numrange_boundary(s, 90);
  double worst = 0.0;
  for (const auto& b : bd) worst = std::max(worst, std::abs(b.vertex));
  CHECK(worst <= r + 1e-10);
  CHECK(worst >= r - 1e-6);  // the extreme direction attains it
}

TEST_CASE("nilpotent block boundary is the circle of radius 1/2") {
  Matrix m(2, 2);
  m(0, 1) = 1.0;
  Operator op = make_dense(m);
  auto bd = numrange_boundary(op, 24);
  for (const auto& b : bd) CHECK(std::abs(std::abs(b.vertex) - 0.5) < 1e-10);
}

TEST_CASE("m-gon is contained in the 2m-gon hull") {
  Operator s = make_shift(24);
  auto small = numrange_boundary(s, 24);
  auto big = numrange_boundary(s, 48);
  // containment via support comparison along the sampled directions
  for (const auto& p : small) {
    double support_small = p.vertex.real() * std::cos(p.theta) +
                           p.vertex.imag() * std::sin(p.theta);
    double support_big = -1e300;
    for (const auto& q : big)
      support_big = std::max(support_big, q.vertex.real() * std::cos(p.theta) +
                                              q.vertex.imag() * std::sin(p.theta));
    CHECK(support_small <= support_big + 1e-12);
  }
}

TEST_CASE("affine hull detects the forced relation of (A, I-A)") {
  Operator a = make_diagonal({cd(0.0), cd(1.0)});
  Matrix ia = Matrix::identity(2) - a.mat;
  SelfAdjointTuple s = make_selfadjoint_tuple({a.mat, ia});
  AffineHull h = affine_hull(s);
  REQUIRE(h.relations.size() == 1);
  REQUIRE(h.dim() == 1);
  // relation proportional to (-1, 1, 1)
  const auto& r = h.relations[0];
  const double scale_to = r[1];
  CHECK(r[0] == doctest::Approx(-scale_to).epsilon(1e-10));
  CHECK(r[2] == doctest::Approx(scale_to).epsilon(1e-10));
  // relation holds in operator norm
  Matrix v = Matrix::identity(2);
  for (auto& x : v.a) x *= r[0];
  v = v + cd(r[1], 0.0) * a.mat + cd(r[2], 0.0) * ia;
  CHECK(opnorm(v) < 1e-10);
  // the hull is the line {(t, 1-t)}: offset satisfies the relation
  CHECK(h.offset[0] + h.offset[1] == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("affine hull of (I) is a point") {
  SelfAdjointTuple s = make_selfadjoint_tuple({Matrix::identity(3)});
  AffineHull h = affine_hull(s);
  CHECK(h.dim() == 0);
  REQUIRE(h.relations.size() == 1);
  CHECK(h.offset[0] == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("generic pair has the full plane as hull") {
  Operator a = make_diagonal({cd(0.0), cd(1.0)});
  Matrix b(2, 2);
  b(0, 1) = 1.0;
  b(1, 0) = 1.0;
  SelfAdjointTuple s = make_selfadjoint_tuple({a.mat, b});
  AffineHull h = affine_hull(s);
  CHECK(h.relations.empty());
  CHECK(h.dim() == 2);
}

TEST_CASE("relation count plus direction dimension equals s") {
  Operator a = make_diagonal({cd(0.0), cd(1.0)});
  Matrix ia = Matrix::identity(2) - a.mat;
  Matrix b(2, 2);
  b(0, 1) = 1.0;
  b(1, 0) = 1.0;
  SelfAdjointTuple s = make_selfadjoint_tuple({a.mat, ia, b});
  AffineHull h = affine_hull(s);
  CHECK(static_cast<int>(h.relations.size()) + h.dim() == 3);
}

TEST_CASE("distance to complement: pinned examples") {
  ConvexRegion disc = disc_region({0.0, 0.0}, 1.0);
  CHECK(dist_to_complement({0.0, 0.0}, disc) == doctest::Approx(1.0));
  CHECK(dist_to_complement({0.6, 0.0}, disc) == doctest::Approx(0.4));
  ConvexRegion square = polygon_region({{-1, -1}, {1, -1}, {1, 1}, {-1, 1}});
  CHECK(dist_to_complement({0.5, 0.0}, square) == doctest::Approx(0.5));
  // closed form for discs matched to 1e-12
  for (double x : {0.1, 0.35, 0.77}) {
    CHECK(dist_to_complement({x, 0.0}, disc) ==
          doctest::Approx(1.0 - x).epsilon(1e-12));
  }
  CHECK(dist_to_complement({1.5, 0.0}, disc) == 0.0);
}

TEST_CASE("halfspace regions require boundedness and support distances") {
  std::vector<ConvexRegion::Halfspace> rows{
      {{1.0, 0.0}, 1.0}, {{-1.0, 0.0}, 1.0}, {{0.0, 1.0}, 1.0}, {{0.0, -1.0}, 1.0}};
  ConvexRegion r = halfspace_region(rows);
  CHECK(dist_to_complement({0.0, 0.0}, r) == doctest::Approx(1.0));
  CHECK(dist_to_complement({0.5, 0.0}, r) == doctest::Approx(0.5));
  std::vector<ConvexRegion::Halfspace> open{{{1.0, 0.0}, 1.0}};
  CHECK_THROWS_AS(halfspace_region(open), Error);
}

TEST_CASE("we_model accepts and rejects the pinned shift configurations") {
  // shift(256) comfortably contains the 0.95 disc
  {
    Operator s = make_shift(256);
    ConvexRegion r = we_model(disc_region({0.0, 0.0}, 0.95), s, 0.02, 180);
    CHECK(r.validated);
    CHECK(r.margin == 0.02);
  }
  // shift(8) has numerical radius cos(pi/9) ~ 0.94 < 0.99
  {
    Operator s = make_shift(8);
    CHECK_THROWS_AS(we_model(disc_region({0.0, 0.0}, 0.99), s, 0.0, 90), Error);
  }
  // hermitian diag(0,1) with the [0,1] segment declared as a 1-D disc
  {
    Operator d = make_diagonal({cd(0.0), cd(1.0)});
    ConvexRegion seg = disc_region({0.5, 0.0}, 0.5);
    ConvexRegion r = we_model(seg, d, 0.01, 16);
    CHECK(r.validated);
  }
}

TEST_CASE("we_model validates polygon and halfspace regions") {
  Operator s = make_shift(64);
  ConvexRegion square = polygon_region({{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}});
  ConvexRegion ok = we_model(square, s, 0.05, 90);
  CHECK(ok.validated);
  ConvexRegion big = polygon_region({{-2, -2}, {2, -2}, {2, 2}, {-2, 2}});
  CHECK_THROWS_AS(we_model(big, s, 0.0, 90), Error);

  std::vector<ConvexRegion::Halfspace> rows{{{1.0, 0.0}, 0.4},
                                            {{-1.0, 0.0}, 0.4},
                                            {{0.0, 1.0}, 0.4},
                                            {{0.0, -1.0}, 0.4}};
  ConvexRegion hs = we_model(halfspace_region(rows), s, 0.05, 90);
  CHECK(hs.validated);
}

TEST_CASE("we_model on a scalar operator accepts only its point range") {
  Vec entries(4, cd(0.5, -0.25));
  Operator t = make_diagonal(entries);
  ConvexRegion point = disc_region({0.5, -0.25}, 0.0);
  CHECK(we_model(point, t, 0.0, 16).validated);
  CHECK_THROWS_AS(we_model(disc_region({0.5, -0.25}, 0.2), t, 0.0, 16), Error);
}

TEST_CASE("dist_to_complement with an affine hull checks membership") {
  Operator a = make_diagonal({cd(0.0), cd(1.0)});
  Matrix ia = Matrix::identity(2) - a.mat;
  SelfAdjointTuple s = make_selfadjoint_tuple({a.mat, ia});
  AffineHull h = affine_hull(s);
  ConvexRegion disc = disc_region({0.5, 0.5}, 0.4);
  CHECK(dist_to_complement({0.5, 0.5}, disc, &h) == doctest::Approx(0.4));
  CHECK_THROWS_AS(dist_to_complement({0.9, 0.5}, disc, &h), Error);
}
