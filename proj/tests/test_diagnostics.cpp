#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bforge/builder.hpp"
#include "bforge/diagnostics.hpp"
#include "bforge/linalg.hpp"
#include "bforge/numrange.hpp"

using namespace bforge;

TEST_CASE("blaschke report: pinned trends") {
  ConvexRegion disc = disc_region({0.0, 0.0}, 1.0);
  // w_k = 1 at the center
  std::vector<std::vector<double>> center(64, {0.0, 0.0});
  CHECK(blaschke_report(center, disc).trend == Trend::Diverging);
  // w_k = 2^-k
  std::vector<std::vector<double>> geometric;
  for (int k = 1; k <= 64; ++k) geometric.push_back({1.0 - std::pow(2.0, -k), 0.0});
  CHECK(blaschke_report(geometric, disc).trend == Trend::Summable);
  // w_k = 1/k over 1000 terms: harmonic divergence
  std::vector<std::vector<double>> harmonic;
  for (int k = 1; k <= 1000; ++k) harmonic.push_back({1.0 - 1.0 / k, 0.0});
  CHECK(blaschke_report(harmonic, disc).trend == Trend::Diverging);
}

TEST_CASE("positive necessary condition") {
  Vec entries;
  for (int i = 0; i < 32; ++i) entries.push_back(cd(0.5 + 0.4 * std::cos(1.3 * i)));
  Operator t = make_diagonal(entries);

  std::vector<double> summable;
  for (int k = 1; k <= 200; ++k) summable.push_back(1.0 / (k * k));
  CHECK(positive_necessary(t, summable).verdict == "infeasible");

  std::vector<double> constant(200, 0.5);
  CHECK(positive_necessary(t, constant).verdict == "unknown");

  Operator neg = make_diagonal({cd(-1.0), cd(0.5)});
  CHECK_THROWS_AS(positive_necessary(neg, constant), Error);
}

TEST_CASE("functional necessary condition reduces to the positive one") {
  Vec entries;
  for (int i = 0; i < 24; ++i) entries.push_back(cd(0.3 + 0.2 * std::sin(i)));
  Operator t = make_diagonal(entries);
  SelfAdjointTuple s = make_selfadjoint_tuple({hermitian_average(t.mat)});

  // alpha = (0, 1): shifted weights lambda_k - min spectrum
  std::vector<std::vector<double>> fast;
  auto [minv, w] = heig_extreme(s.parts[0], false);
  (void)w;
  for (int k = 1; k <= 200; ++k) fast.push_back({minv + std::pow(2.0, -k)});
  Verdict v = functional_necessary(s, fast, {0.0, 1.0});
  CHECK(v.verdict == "infeasible");

  std::vector<std::vector<double>> slow(200, {0.5});
  CHECK(functional_necessary(s, slow, {0.0, 1.0}).verdict == "unknown");

  CHECK_THROWS_AS(functional_necessary(s, slow, {1.0, 0.0}), Error);
}

TEST_CASE("shift characterization: pinned iff examples") {
  Vec harmonic, geometric, zeros;
  for (int k = 1; k <= 1000; ++k) {
    harmonic.push_back(cd(1.0 - 1.0 / k));
    zeros.push_back(cd(0.0));
  }
  for (int k = 1; k <= 50; ++k) geometric.push_back(cd(1.0 - std::pow(2.0, -k)));
  CHECK(shift_characterization(harmonic).verdict == "is-diagonal");
  CHECK(shift_characterization(geometric).verdict == "not-diagonal");
  CHECK(shift_characterization(zeros).verdict == "is-diagonal");
  CHECK_THROWS_AS(shift_characterization(Vec{cd(1.0)}), Error);
}

TEST_CASE("unitary diagonal condition: pinned inequality cases") {
  // d = (0.9, 1, 1, ...): LHS 0.2 > RHS 0.1
  TailSequence a;
  a.values = {cd(0.9), cd(1.0)};
  a.tail = cd(1.0);
  a.has_tail = true;
  CHECK_FALSE(unitary_diag_condition(a));

  TailSequence b;
  b.values = {cd(1.0)};
  CHECK(unitary_diag_condition(b));  // 0 <= 0

  TailSequence c;
  c.values = {cd(0.5)};
  CHECK(unitary_diag_condition(c));  // the tail diverges

  TailSequence d;
  d.values = {cd(1.5)};
  CHECK_THROWS_AS(unitary_diag_condition(d), Error);
}

TEST_CASE("kadison condition: the pinned triple") {
  TailSequence half;
  half.values = {cd(0.5)};
  CHECK(kadison_condition(half).verdict == "divergent-admissible");

  TailSequence integral;
  integral.values = {cd(0.75), cd(0.25)};
  integral.tail = cd(0.0);
  integral.has_tail = true;
  KadisonVerdict v = kadison_condition(integral);
  CHECK(v.verdict == "admissible");
  CHECK(v.a == doctest::Approx(0.25));
  CHECK(v.b == doctest::Approx(0.25));

  TailSequence off;
  off.values = {cd(0.75), cd(1.0 / 3.0)};
  off.tail = cd(0.0);
  off.has_tail = true;
  KadisonVerdict w = kadison_condition(off);
  CHECK(w.verdict == "inadmissible");
  CHECK(w.a - w.b == doctest::Approx(1.0 / 12.0).epsilon(1e-12));

  TailSequence bad;
  bad.values = {cd(1.5)};
  CHECK_THROWS_AS(kadison_condition(bad), Error);
}

TEST_CASE("shift characterization agrees with the blaschke report on the disc") {
  ConvexRegion disc = disc_region({0.0, 0.0}, 1.0);
  Rng rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    Vec lam;
    std::vector<std::vector<double>> pts;
    for (int k = 0; k < 300; ++k) {
      const double r = 0.95 * rng.uniform();
      const double th = 2.0 * M_PI * rng.uniform();
      const cd z = r * std::exp(cd(0.0, th));
      lam.push_back(z);
      pts.push_back({z.real(), z.imag()});
    }
    const auto verdict = shift_characterization(lam).verdict;
    const auto trend = blaschke_report(pts, disc).trend;
    if (trend == Trend::Diverging) CHECK(verdict == "is-diagonal");
    if (trend == Trend::Summable) CHECK(verdict == "not-diagonal");
  }
}

TEST_CASE("builder-produced shift diagonals pass the characterization") {
  Operator sh = make_shift(96);
  ConvexRegion region = we_model(disc_region({0.0, 0.0}, 0.9), sh, 0.02, 90);
  Rng rng(33);
  for (int trial = 0; trial < 3; ++trial) {
    const int K = 8;
    std::vector<Vec> targets;
    Vec lam;
    for (int k = 0; k < K; ++k) {
      const double r = 0.5 * rng.uniform();
      const double th = 2.0 * M_PI * rng.uniform();
      const cd z = r * std::exp(cd(0.0, th));
      targets.push_back(Vec{z});
      lam.push_back(z);
    }
    BuildResult res = build_exact_diagonal_complex(
        single(sh), &region, targets, {}, standard_dense_sequence(96), K);
    // realized diagonal values match the targets, which stay well inside
    Vec realized;
    for (int k = 0; k < K; ++k)
      realized.push_back(inner(matvec(sh.mat, res.frame.vectors[k]), res.frame.vectors[k]));
    for (int k = 0; k < K; ++k) CHECK(std::abs(realized[k] - lam[k]) <= 1e-9);
    CHECK(shift_characterization(realized).verdict == "is-diagonal");
  }
}

TEST_CASE("the W2 refutation for the diagonal example operator") {
  // T = diag(-1, 1/2, 1/4, ...): no unit vector orthogonal to e1 gives a
  // nonpositive value, so no two-dimensional compression can vanish
  Vec entries{cd(-1.0)};
  for (int k = 0; k < 24; ++k) entries.push_back(cd(std::pow(2.0, -(k + 1))));
  Operator t = make_diagonal(entries);
  SelfAdjointTuple s = make_selfadjoint_tuple({t.mat});
  Vec e1(25, cd(0.0));
  e1[0] = 1.0;
  // the compression to {e1}^perp is positive definite: its minimum exceeds 0
  auto comp = complement_basis({e1}, 25);
  Matrix q(25, static_cast<int>(comp.size()));
  for (size_t j = 0; j < comp.size(); ++j)
    for (int i = 0; i < 25; ++i) q(i, static_cast<int>(j)) = comp[j][i];
  Matrix b = hermitian_average(matmul('C', q, 'N', matmul(t.mat, q)));
  auto [lo, v] = heig_extreme(b, false);
  (void)v;
  CHECK(lo > 0.0);
}
