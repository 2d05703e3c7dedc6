#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bforge/linalg.hpp"
#include "bforge/moment.hpp"

using namespace bforge;

namespace {

double cmax(const Vec& v) {
  double m = 0.0;
  for (const auto& z : v) m = std::max(m, std::abs(z));
  return m;
}

}  // namespace

TEST_CASE("weight budget recursion: pinned values") {
  CHECK(b_bound(1, 1.0) == doctest::Approx(1.0));
  CHECK(b_bound(2, 1.0) == doctest::Approx(3.0));
  CHECK(b_bound(3, 1.0) == doctest::Approx(7.0));
  CHECK(b_bound(2, 0.5) == doctest::Approx(8.0));  // 2*2 + 4
}

TEST_CASE("closed bounds dominate the recursion for n <= 20") {
  for (int n = 1; n <= 20; ++n) {
    for (double rho : {0.25, 0.5, 0.9, 1.0}) {
      CHECK(b_bound(n, rho) <=
            (std::pow(2.0, n) - 1.0) * std::pow(rho, -n) * (1.0 + 1e-12));
    }
    for (double rho : {1.0, 1.5, 3.0}) {
      CHECK(b_bound(n, rho) <= (std::pow(2.0, n) - 1.0) * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("decomposition base case: one point at the phase of eps") {
  const cd eps = 0.5 * std::exp(cd(0.0, M_PI / 3.0));
  MomentDecomposition d = circle_moment_decompose({eps}, 1.0);
  REQUIRE(d.points.size() == 1);
  CHECK(d.weights[0] == doctest::Approx(0.5));
  CHECK(std::abs(d.points[0] - std::exp(cd(0.0, M_PI / 3.0))) < 1e-14);
}

TEST_CASE("zero target gives the empty decomposition") {
  MomentDecomposition d = circle_moment_decompose(Vec(3, cd(0.0)), 1.0);
  CHECK(d.points.empty());
  CHECK(d.weights.empty());
  CHECK(moment_reconstruction_residual(d) == 0.0);
}

TEST_CASE("n=2 correction stage: pinned roots-of-unity pattern") {
  MomentDecomposition d = circle_moment_decompose({cd(0.0), cd(0.3)}, 1.0);
  REQUIRE(d.points.size() == 2);
  CHECK(d.weights[0] == doctest::Approx(0.15));
  CHECK(d.weights[1] == doctest::Approx(0.15));
  // points are the two square roots pattern {-1, +1}
  CHECK(std::abs(d.points[0] + 1.0) < 1e-12);
  CHECK(std::abs(d.points[1] - 1.0) < 1e-12);
  CHECK(moment_reconstruction_residual(d) < 1e-14);
  CHECK(d.weight_sum() <= b_bound(2, 1.0) * 0.3 + 1e-12);
}

TEST_CASE("random reconstruction and weight bounds") {
  Rng rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng.next() % 5);
    const double rho = std::vector<double>{0.5, 1.0, 2.0}[rng.next() % 3];
    Vec eps(n);
    for (auto& e : eps) e = cd(rng.normal(), rng.normal()) * 2.0;
    MomentDecomposition d = circle_moment_decompose(eps, rho);
    const double scale = std::max(1.0, std::pow(rho, n)) * std::max(1.0, cmax(eps));
    CHECK(moment_reconstruction_residual(d) <= 1e-10 * scale);
    CHECK(d.weight_sum() <= b_bound(n, rho) * cmax(eps) * (1.0 + 1e-12));
    for (const auto& p : d.points) CHECK(std::abs(std::abs(p) - rho) < 1e-12);
    for (double w : d.weights) CHECK(w >= 0.0);
  }
}

TEST_CASE("G maps: pinned identity and the binomial formula") {
  // G_0 is the identity
  Vec z{cd(0.3, 0.1), cd(-0.2, 0.4)};
  Vec w = apply_G(cd(0.0), z);
  CHECK(std::abs(w[0] - z[0]) < 1e-15);
  CHECK(std::abs(w[1] - z[1]) < 1e-15);
  // G maps curve points to shifted curve points: lambda=1, mu=2, n=2 -> (3, 9)
  Vec curve{cd(2.0), cd(4.0)};
  Vec shifted = apply_G(cd(1.0), curve);
  CHECK(std::abs(shifted[0] - cd(3.0)) < 1e-12);
  CHECK(std::abs(shifted[1] - cd(9.0)) < 1e-12);
}

TEST_CASE("G round trip on random tuples") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + static_cast<int>(rng.next() % 5);
    const cd lambda(rng.normal() * 0.7, rng.normal() * 0.7);
    Vec z(n);
    for (auto& e : z) e = cd(rng.normal(), rng.normal());
    Vec round = invert_G(lambda, apply_G(lambda, z));
    double err = 0.0;
    for (int j = 0; j < n; ++j) err = std::max(err, std::abs(round[j] - z[j]));
    CHECK(err <= 1e-12 * std::max(1.0, cmax(z)) * std::pow(2.0 + std::abs(lambda), n));
  }
}

TEST_CASE("G is Lipschitz with constant 2^n max(1, |lambda|^n)") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + static_cast<int>(rng.next() % 4);
    const cd lambda(rng.normal(), rng.normal());
    Vec u(n), v(n);
    for (int j = 0; j < n; ++j) {
      u[j] = cd(rng.normal(), rng.normal());
      v[j] = cd(rng.normal(), rng.normal());
    }
    Vec gu = apply_G(lambda, u), gv = apply_G(lambda, v);
    Vec du(n);
    for (int j = 0; j < n; ++j) du[j] = gu[j] - gv[j];
    Vec dv(n);
    for (int j = 0; j < n; ++j) dv[j] = u[j] - v[j];
    const double lip = std::pow(2.0, n) * std::max(1.0, std::pow(std::abs(lambda), n));
    CHECK(cmax(du) <= lip * cmax(dv) * (1.0 + 1e-12));
  }
}

TEST_CASE("hull distance lower bound: pinned values") {
  CHECK(hull_distance_lower_bound(cd(0.0), 1.0, 1) == doctest::Approx(0.5));
  CHECK(hull_distance_lower_bound(cd(0.0), 0.5, 2) == doctest::Approx(0.0625));
  CHECK(hull_distance_lower_bound(cd(1.0), 0.5, 2) == doctest::Approx(0.015625));
  CHECK_THROWS_AS(hull_distance_lower_bound(cd(0.0), 1.5, 1), Error);
}

TEST_CASE("power membership threshold is strict") {
  CHECK(winf_membership_power({cd(0.4)}, 1.0));
  CHECK_FALSE(winf_membership_power({cd(0.5)}, 1.0));
  CHECK(winf_membership_power({cd(0.2), cd(0.2)}, 1.0));
  CHECK_FALSE(winf_membership_power({cd(0.2), cd(0.25)}, 1.0));
}

TEST_CASE("hull membership certificates: ball around the curve point") {
  for (const cd lambda : {cd(0.0), cd(0.5), cd(0.6, 0.3)}) {
    const double rho = 0.5;
    const int n = 2;
    const double bound = hull_distance_lower_bound(lambda, rho, n);
    Vec base(n);
    cd acc = 1.0;
    for (int j = 0; j < n; ++j) {
      acc *= lambda;
      base[j] = acc;
    }
    Rng rng(3);
    for (int trial = 0; trial < 40; ++trial) {
      Vec w = base;
      for (int j = 0; j < n; ++j) {
        const double a = rng.uniform() * 2.0 * M_PI;
        w[j] += bound * (1.0 - 1e-6) * rng.uniform() * std::exp(cd(0.0, a));
      }
      HullMembership m = hull_membership_certificate(w, lambda, rho);
      CHECK(m.residual <= 1e-8);
      CHECK(m.base_weight >= 0.0);
      double total = m.base_weight;
      for (double x : m.weights) {
        CHECK(x >= 0.0);
        total += x;
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
      for (const auto& nu : m.circle_points)
        CHECK(std::abs(std::abs(nu - lambda) - rho) < 1e-12);
    }
  }
}

TEST_CASE("hull oracle samples live inside the membership certificate world") {
  HullOracle o = hull_oracle(cd(0.3), 0.4, 2, 16, 5);
  CHECK(o.curve_points.size() == 16);
  for (const auto& p : o.curve_points) {
    // every curve point is (mu, mu^2) with |mu - lambda| = rho
    CHECK(std::abs(std::abs(p[0] - cd(0.3)) - 0.4) < 1e-12);
    CHECK(std::abs(p[1] - p[0] * p[0]) < 1e-12);
  }
  // degenerate rho -> 0 collapses to the curve point of lambda
  HullOracle tiny = hull_oracle(cd(0.3), 1e-12, 2, 8, 1);
  for (const auto& p : tiny.curve_points) CHECK(std::abs(p[0] - cd(0.3)) < 1e-11);
}

TEST_CASE("small-ball membership via decomposition weight slack") {
  // for ||eps|| <= rho^n 2^-n the decomposition plus the origin weight is a
  // convex combination
  Rng rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng.next() % 3);
    const double rho = 0.5 + 0.5 * rng.uniform();
    const double cap = std::pow(rho, n) / std::pow(2.0, n);
    Vec eps(n);
    for (auto& e : eps)
      e = cap * 0.999 * rng.uniform() * std::exp(cd(0.0, rng.uniform() * 2.0 * M_PI));
    MomentDecomposition d = circle_moment_decompose(eps, rho);
    CHECK(d.weight_sum() <= 1.0 + 1e-12);
  }
}
