#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bforge/linalg.hpp"
#include "bforge/operators.hpp"

using namespace bforge;

namespace {

Matrix random_matrix(int n, uint64_t seed) {
  Rng rng(seed);
  Matrix m(n, n);
  for (auto& v : m.a) v = cd(rng.normal(), rng.normal());
  return m;
}

}  // namespace

TEST_CASE("shift generator has ones on the first superdiagonal") {
  Operator s = make_shift(3);
  CHECK(s.dim == 3);
  CHECK(s.bandwidth == 1);
  CHECK(s.mat(0, 1) == cd(1.0));
  CHECK(s.mat(1, 2) == cd(1.0));
  CHECK(s.mat(0, 0) == cd(0.0));
  CHECK(s.mat(1, 0) == cd(0.0));
  CHECK(s.mat(2, 2) == cd(0.0));
}

TEST_CASE("diagonal generator reproduces the (-1, 1/2, 1/4) prefix") {
  Operator d = make_diagonal({cd(-1.0), cd(0.5), cd(0.25)});
  CHECK(d.mat(0, 0) == cd(-1.0));
  CHECK(d.mat(1, 1) == cd(0.5));
  CHECK(d.mat(2, 2) == cd(0.25));
  CHECK(d.bandwidth == 0);
}

TEST_CASE("dense generator accepts the 2x2 nilpotent block") {
  Matrix m(2, 2);
  m(0, 1) = 1.0;
  Operator d = make_dense(m);
  CHECK(d.dim == 2);
  CHECK(d.mat(0, 1) == cd(1.0));
  CHECK(d.bandwidth == 1);
}

TEST_CASE("load_operator rejects malformed specs") {
  CHECK_THROWS_AS(make_shift(0), Error);
  OperatorSpec spec;
  spec.kind = OpKind::Diagonal;
  spec.dim = 3;
  spec.diagonal_entries = {cd(1.0)};
  CHECK_THROWS_AS(load_operator(spec), Error);
}

TEST_CASE("hermitian parts of the nilpotent block are the pinned matrices") {
  Matrix m(2, 2);
  m(0, 1) = 1.0;
  SelfAdjointTuple s = hermitian_parts(single(m));
  REQUIRE(s.s == 2);
  CHECK(std::abs(s.parts[0](0, 1) - cd(0.5)) < 1e-15);
  CHECK(std::abs(s.parts[0](1, 0) - cd(0.5)) < 1e-15);
  CHECK(std::abs(s.parts[1](0, 1) - cd(0.0, -0.5)) < 1e-15);
  CHECK(std::abs(s.parts[1](1, 0) - cd(0.0, 0.5)) < 1e-15);
}

TEST_CASE("hermitian operator splits as (T, 0)") {
  Matrix m(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = -2.0;
  m(0, 1) = cd(0.0, 3.0);
  m(1, 0) = cd(0.0, -3.0);
  SelfAdjointTuple s = hermitian_parts(single(m));
  CHECK(max_abs(s.parts[0] - m) < 1e-15);
  CHECK(max_abs(s.parts[1]) < 1e-15);
}

TEST_CASE("Re + i Im reconstructs random operators to 1e-14") {
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    Matrix m = random_matrix(24, seed);
    SelfAdjointTuple s = hermitian_parts(single(m));
    Matrix rec = s.parts[0] + cd(0.0, 1.0) * s.parts[1];
    CHECK(max_abs(rec - m) < 1e-14 * std::max(1.0, max_abs(m)));
  }
}

TEST_CASE("compression onto the full standard basis is the identity map") {
  Matrix m = random_matrix(6, 77);
  std::vector<int> idx{0, 1, 2, 3, 4, 5};
  Matrix c = compress(m, standard_frame(6, idx));
  CHECK(max_abs(c - m) < 1e-14 * std::max(1.0, max_abs(m)));
}

TEST_CASE("compression of diag(1,2,3) onto {e1, e3} is diag(1,3)") {
  Operator d = make_diagonal({cd(1.0), cd(2.0), cd(3.0)});
  Matrix c = compress(d.mat, standard_frame(3, {0, 2}));
  CHECK(c.rows == 2);
  CHECK(std::abs(c(0, 0) - cd(1.0)) < 1e-15);
  CHECK(std::abs(c(1, 1) - cd(3.0)) < 1e-15);
  CHECK(std::abs(c(0, 1)) < 1e-15);
  CHECK(std::abs(c(1, 0)) < 1e-15);
}

TEST_CASE("shift compression onto separated supports vanishes exactly") {
  Operator s = make_shift(4);
  Matrix c = compress(s.mat, standard_frame(4, {0, 2}));
  CHECK(max_abs(c) == 0.0);
}

TEST_CASE("banded cross compressions between separated windows are zero") {
  Operator s = make_shift(64);
  // one frame on [0, 8), one on [16, 24): separation 8 > bandwidth 1
  Frame a = standard_frame(64, {0, 1, 2, 3, 4, 5, 6, 7});
  Frame b = standard_frame(64, {16, 17, 18, 19, 20, 21, 22, 23});
  for (const auto& u : a.vectors)
    for (const auto& v : b.vectors) {
      CHECK(std::abs(inner(matvec(s.mat, u), v)) == 0.0);
      CHECK(std::abs(inner(matvec(s.mat, v), u)) == 0.0);
    }
}

TEST_CASE("frame audit reports exact residuals") {
  Frame std3 = standard_frame(3, {0, 1, 2});
  FrameAudit a = audit_frame(std3);
  CHECK(a.max_gram_offdiag == 0.0);
  CHECK(a.max_norm_deviation == 0.0);

  Frame bad;
  bad.dim = 2;
  bad.vectors.push_back({cd(1.0), cd(0.0)});
  const double r = 1.0 / std::sqrt(2.0);
  bad.vectors.push_back({cd(r), cd(r)});
  FrameAudit b = audit_frame(bad);
  CHECK(b.max_gram_offdiag == doctest::Approx(r).epsilon(1e-12));
  CHECK_THROWS_AS(require_orthonormal(bad), Error);
}

TEST_CASE("weighted shift and jordan generators") {
  Operator w = make_weighted_shift({cd(2.0), cd(3.0)});
  CHECK(w.dim == 3);
  CHECK(w.mat(0, 1) == cd(2.0));
  CHECK(w.mat(1, 2) == cd(3.0));
  Operator j = make_jordan(3, cd(0.5, -0.5));
  CHECK(j.mat(1, 1) == cd(0.5, -0.5));
  CHECK(j.mat(1, 2) == cd(1.0));
}

TEST_CASE("tuple values and norms") {
  Operator s = make_shift(8);
  OperatorTuple t = power_tuple(s, 2);
  CHECK(t.n == 2);
  Vec e0(8, cd(0.0));
  e0[0] = 1.0;
  Vec v = tuple_value(t, e0);
  CHECK(std::abs(v[0]) == 0.0);
  CHECK(std::abs(v[1]) == 0.0);
  CHECK(max_part_norm(t) == doctest::Approx(1.0).epsilon(1e-12));
}
