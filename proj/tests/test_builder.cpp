#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bforge/builder.hpp"
#include "bforge/linalg.hpp"
#include "bforge/numrange.hpp"

using namespace bforge;

namespace {

double cmax_resid(const Vec& a, const Vec& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

std::vector<Vec> constant_targets(cd z, int k) { return std::vector<Vec>(k, Vec{z}); }

}  // namespace

TEST_CASE("greedy partition: unit weights alternate between two groups") {
  auto groups = partition_indices(std::vector<double>(6, 1.0), 2);
  REQUIRE(groups.size() == 2);
  CHECK(groups[0] == std::vector<int>{1, 3, 5});
  CHECK(groups[1] == std::vector<int>{2, 4, 6});
  auto one = partition_indices(std::vector<double>(5, 1.0), 1);
  CHECK(one[0].size() == 5);
}

TEST_CASE("greedy partition balances partial sums within one max weight") {
  Rng rng(3);
  std::vector<double> w;
  double wmax = 0.0;
  for (int k = 0; k < 200; ++k) {
    w.push_back(0.01 + rng.uniform());
    wmax = std::max(wmax, w.back());
  }
  auto groups = partition_indices(w, 4);
  std::vector<double> sums(4, 0.0);
  for (int m = 0; m < 4; ++m)
    for (int k : groups[m]) sums[m] += w[k - 1];
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) CHECK(std::abs(sums[a] - sums[b]) <= wmax + 1e-12);
}

TEST_CASE("exact diagonal on the shift: zero targets, audited certificate") {
  Operator sh = make_shift(64);
  ConvexRegion region = we_model(disc_region({0.0, 0.0}, 0.9), sh, 0.02, 90);
  const int K = 12;
  BuildResult res = build_exact_diagonal_complex(
      single(sh), &region, constant_targets(cd(0.0), K), {},
      standard_dense_sequence(64), K);

  REQUIRE(res.frame.size() == K);
  FrameAudit audit = audit_frame(res.frame);
  CHECK(audit.max_gram_offdiag <= 1e-10);
  CHECK(audit.max_norm_deviation <= 1e-10);
  for (int k = 0; k < K; ++k) {
    const cd value = inner(matvec(sh.mat, res.frame.vectors[k]), res.frame.vectors[k]);
    CHECK(std::abs(value) <= 1e-10);
  }
  SelfAdjointTuple s = hermitian_parts(single(sh));
  VerifyReport rep = verify_certificate(res.cert, res.frame, s, standard_dense_sequence(64));
  CHECK(rep.ok);
  // per-step decay matches the mu-point geometry
  for (const auto& st : res.cert.steps) {
    if (st.degenerate || st.delta == 0.0) continue;
    CHECK(st.delta == doctest::Approx(0.45).epsilon(1e-9));
    // colinearity: mu on the far side of lambda from <Sb,b>
    REQUIRE(st.mu.size() == 2);
    const double mu_norm = std::hypot(st.mu[0], st.mu[1]);
    CHECK(mu_norm == doctest::Approx(st.delta).epsilon(1e-9));
  }
}

TEST_CASE("exact diagonal with a nonzero constant target") {
  Operator sh = make_shift(64);
  ConvexRegion region = we_model(disc_region({0.0, 0.0}, 0.9), sh, 0.02, 90);
  const int K = 8;
  BuildResult res = build_exact_diagonal_complex(
      single(sh), &region, constant_targets(cd(0.3, 0.2), K), {},
      standard_dense_sequence(64), K);
  for (int k = 0; k < K; ++k) {
    const cd value = inner(matvec(sh.mat, res.frame.vectors[k]), res.frame.vectors[k]);
    CHECK(std::abs(value - cd(0.3, 0.2)) <= 1e-10);
  }
  SelfAdjointTuple s = hermitian_parts(single(sh));
  CHECK(verify_certificate(res.cert, res.frame, s, standard_dense_sequence(64)).ok);
}

TEST_CASE("targets outside the region fail before any step") {
  Operator sh = make_shift(64);
  ConvexRegion region = we_model(disc_region({0.0, 0.0}, 0.9), sh, 0.02, 90);
  CHECK_THROWS_WITH_AS(
      build_exact_diagonal_complex(single(sh), &region, constant_targets(cd(0.95), 4),
                                   {}, standard_dense_sequence(64), 4),
      doctest::Contains("not interior"), Error);
}

TEST_CASE("hermitian operator reduces to a one-dimensional build") {
  Vec diag;
  for (int i = 0; i < 32; ++i) diag.push_back(cd(std::cos(2.2 * i), 0.0));
  Operator d = make_diagonal(diag);
  ConvexRegion seg = disc_region({0.0, 0.0}, 0.9);  // segment within the hull
  const int K = 6;
  BuildResult res = build_exact_diagonal_complex(
      single(d), &seg, constant_targets(cd(0.1), K), {}, standard_dense_sequence(32), K);
  CHECK(res.cert.pivots.size() == 1);  // the imaginary part was eliminated
  CHECK(res.cert.s == 1);
  for (int k = 0; k < K; ++k) {
    const cd value = inner(matvec(d.mat, res.frame.vectors[k]), res.frame.vectors[k]);
    CHECK(std::abs(value - cd(0.1)) <= 1e-9);
    CHECK(std::abs(value.imag()) <= 1e-12);
  }
}

TEST_CASE("affine relation T2 = I - T1: consistent targets build, inconsistent reject") {
  Vec diag;
  for (int i = 0; i < 40; ++i) diag.push_back(cd(0.5 + 0.4 * std::sin(1.7 * i), 0.0));
  Operator a = make_diagonal(diag);
  Matrix ia = Matrix::identity(40) - a.mat;
  OperatorTuple t;
  t.n = 2;
  t.dim = 40;
  t.parts = {a.mat, ia};

  // consistent: lambda_2 = 1 - lambda_1, both real
  std::vector<Vec> good(5, Vec{cd(0.5), cd(0.5)});
  std::vector<double> weights(5, 0.1);
  BuildResult res = build_exact_diagonal_complex(t, nullptr, good, weights,
                                                 standard_dense_sequence(40), 5);
  for (int k = 0; k < 5; ++k) {
    Vec v = tuple_value(t, res.frame.vectors[k]);
    CHECK(std::abs(v[0] - cd(0.5)) <= 1e-9);
    CHECK(std::abs(v[1] - cd(0.5)) <= 1e-9);
  }

  std::vector<Vec> bad(5, Vec{cd(0.5), cd(0.7)});
  CHECK_THROWS_AS(build_exact_diagonal_complex(t, nullptr, bad, weights,
                                               standard_dense_sequence(40), 5),
                  Error);
}

TEST_CASE("region declared in reduced coordinates drives the reduced build") {
  // hermitian operator: the imaginary coordinate is eliminated and the
  // caller may declare the admissible region directly on the real line
  Vec diag;
  for (int i = 0; i < 32; ++i) diag.push_back(cd(std::cos(1.9 * i), 0.0));
  Operator d = make_diagonal(diag);
  ConvexRegion line = disc_region({0.0}, 0.8);  // ambient 1
  const int K = 5;
  std::vector<Vec> targets(K, Vec{cd(-0.2)});
  BuildResult res = build_exact_diagonal_complex(single(d), &line, targets, {},
                                                 standard_dense_sequence(32), K);
  CHECK(res.cert.s == 1);
  for (int k = 0; k < K; ++k) {
    const cd value = inner(matvec(d.mat, res.frame.vectors[k]), res.frame.vectors[k]);
    CHECK(std::abs(value - cd(-0.2)) <= 1e-9);
  }
}

TEST_CASE("approximate diagonal obeys the literal alpha bounds") {
  Operator sh = make_shift(64);
  const int K = 12;
  std::vector<double> alphas;
  for (int k = 1; k <= K; ++k) alphas.push_back(1.0 / k);
  ConvexRegion region = disc_region({0.0, 0.0}, 0.95);
  BuildResult res =
      build_approx_diagonal(single(sh), constant_targets(cd(0.0), K), alphas,
                            &region, standard_dense_sequence(64), K);
  for (int k = 0; k < K; ++k) {
    const cd value = inner(matvec(sh.mat, res.frame.vectors[k]), res.frame.vectors[k]);
    CHECK(std::abs(value) <= alphas[k] + 1e-12);
  }
  FrameAudit audit = audit_frame(res.frame);
  CHECK(audit.max_gram_offdiag <= 1e-10);
  SelfAdjointTuple s = hermitian_parts(single(sh));
  CHECK(verify_certificate(res.cert, res.frame, s, standard_dense_sequence(64)).ok);
}

TEST_CASE("huge alphas saturate the mixing coefficient: u_N = b") {
  Operator sh = make_shift(32);
  const int K = 4;
  std::vector<double> alphas(K, 8.0);  // >= 4 max||T_j||
  BuildResult res =
      build_approx_diagonal(single(sh), constant_targets(cd(0.0), K), alphas,
                            nullptr, standard_dense_sequence(32), K);
  for (const auto& st : res.cert.steps) CHECK(st.c == doctest::Approx(1.0));
  // with c = 1 the first step absorbs y_1 entirely
  CHECK(res.cert.steps[0].ln_dist2 <= std::log(1e-250));
}

TEST_CASE("zero alphas are rejected") {
  Operator sh = make_shift(32);
  CHECK_THROWS_AS(build_approx_diagonal(single(sh), constant_targets(cd(0.0), 3),
                                        {0.5, 0.0, 0.5}, nullptr,
                                        standard_dense_sequence(32), 3),
                  Error);
}

TEST_CASE("schatten perturbation: pinned hypothesis checks and bounds") {
  Operator sh = make_shift(64);
  ConvexRegion disc = disc_region({0.0, 0.0}, 1.0);
  const int K = 12;
  std::vector<Vec> targets;
  for (int k = 1; k <= K; ++k) targets.push_back(Vec{cd(1.0 + 1.0 / (k * k), 0.0)});

  CHECK_THROWS_AS(build_schatten_perturbation(single(sh), targets, 1.0, disc,
                                              standard_dense_sequence(64), K),
                  Error);

  SchattenResult res = build_schatten_perturbation(single(sh), targets, 2.0, disc,
                                                   standard_dense_sequence(64), K);
  REQUIRE(static_cast<int>(res.report.kappa_partial.size()) == K);
  for (int k = 0; k < K; ++k)
    CHECK(res.report.kappa_partial[k] <= res.report.bound_partial[k] + 1e-9);
  // kappa_k = lambda_k - realized diagonal entry
  for (int k = 0; k < K; ++k) {
    const cd value = inner(matvec(sh.mat, res.frame.vectors[k]), res.frame.vectors[k]);
    CHECK(std::abs(res.report.kappas[k][0] - (targets[k][0] - value)) < 1e-12);
  }
}

TEST_CASE("interior schatten targets keep kappa within 1/k") {
  Operator sh = make_shift(64);
  ConvexRegion disc = disc_region({0.0, 0.0}, 0.9);
  const int K = 8;
  std::vector<Vec> targets(K, Vec{cd(0.2, 0.1)});
  SchattenResult res = build_schatten_perturbation(single(sh), targets, 1.5, disc,
                                                   standard_dense_sequence(64), K);
  for (int k = 0; k < K; ++k) {
    double kn = std::abs(res.report.kappas[k][0]);
    CHECK(kn <= 1.0 / (k + 1) + 1e-12);
  }
}

TEST_CASE("power diagonal kills both powers on the shift") {
  Operator sh = make_shift(128);
  const int K = 4;
  Vec lambdas(K, cd(0.0));
  BuildResult res = build_power_diagonal(sh, lambdas, 2, disc_region({0.0, 0.0}, 1.0),
                                         standard_dense_sequence(128), K);
  OperatorTuple t2 = power_tuple(sh, 2);
  for (int k = 0; k < K; ++k) {
    Vec v = tuple_value(t2, res.frame.vectors[k]);
    CHECK(std::abs(v[0]) <= 1e-8);
    CHECK(std::abs(v[1]) <= 1e-8);
  }
  CHECK(res.cert.kind == "power");
}

TEST_CASE("power diagonal rejects targets outside the spectral disc") {
  Operator sh = make_shift(64);
  CHECK_THROWS_AS(build_power_diagonal(sh, Vec{cd(1.2)}, 2, disc_region({0.0, 0.0}, 1.0),
                                       standard_dense_sequence(64), 1),
                  Error);
}

TEST_CASE("power diagonal at n = 1 runs the plain complex build") {
  Operator sh = make_shift(96);
  const int K = 6;
  Vec lambdas(K, cd(0.1, -0.05));
  BuildResult res = build_power_diagonal(sh, lambdas, 1, disc_region({0.0, 0.0}, 1.0),
                                         standard_dense_sequence(96), K);
  CHECK(res.cert.kind == "power");
  CHECK(res.cert.s == 2);  // one complex coordinate, no reduction
  for (int k = 0; k < K; ++k) {
    const cd value = inner(matvec(sh.mat, res.frame.vectors[k]), res.frame.vectors[k]);
    CHECK(std::abs(value - lambdas[k]) <= 1e-9);
  }
}

TEST_CASE("summable power weights raise the weak-divergence flag") {
  // targets race to the boundary of the *declared* spectral disc while
  // staying deep inside the truncation's range
  Operator sh = make_shift(128);
  const int K = 20;
  Vec lambdas;
  for (int k = 1; k <= K; ++k) lambdas.push_back(cd(0.35 * (1.0 - std::pow(2.0, -k))));
  BuildResult res = build_power_diagonal(sh, lambdas, 1, disc_region({0.0, 0.0}, 0.35),
                                         standard_dense_sequence(128), K);
  CHECK(res.cert.flags.count("blaschke_trend") == 1);
}

TEST_CASE("generic selfadjoint triple builds through the multistart path") {
  // three random Hermitian parts; targets are values of known witnesses, so
  // interiority is certain and only the solver is under test
  Rng rng(2024);
  const int dim = 48;
  std::vector<Matrix> parts;
  for (int p = 0; p < 3; ++p) {
    Matrix m(dim, dim);
    for (int j = 0; j < dim; ++j)
      for (int i = 0; i <= j; ++i) {
        const cd v(rng.normal(), i == j ? 0.0 : rng.normal());
        m(i, j) = v;
        m(j, i) = std::conj(v);
      }
    const double nn = opnorm(m);
    for (auto& v : m.a) v /= nn;
    parts.push_back(std::move(m));
  }
  SelfAdjointTuple s = make_selfadjoint_tuple(parts, 1e-9);

  TargetSequence seq;
  const int K = 4;
  Vec witness = rng.unit_vector(dim);
  const std::vector<double> center = tuple_value(s, witness);
  for (int k = 0; k < K; ++k) {
    seq.points.push_back(center);
    seq.weights.push_back(0.02);
  }
  BuildOptions opts;
  opts.tol_attain = 1e-8;
  BuildResult res =
      build_exact_diagonal(s, nullptr, seq, standard_dense_sequence(dim), K, opts);
  for (int k = 0; k < K; ++k) {
    const std::vector<double> v = tuple_value(s, res.frame.vectors[k]);
    double resid = 0.0;
    for (int j = 0; j < 3; ++j) resid += (v[j] - center[j]) * (v[j] - center[j]);
    CHECK(std::sqrt(resid) <= 1e-8);
  }
  CHECK(verify_certificate(res.cert, res.frame, s, standard_dense_sequence(dim)).ok);
}

TEST_CASE("verify_certificate flags a tampered frame at the right step") {
  Operator sh = make_shift(48);
  ConvexRegion region = we_model(disc_region({0.0, 0.0}, 0.85), sh, 0.02, 90);
  const int K = 6;
  BuildResult res = build_exact_diagonal_complex(
      single(sh), &region, constant_targets(cd(0.0), K), {},
      standard_dense_sequence(48), K);
  SelfAdjointTuple s = hermitian_parts(single(sh));
  CHECK(verify_certificate(res.cert, res.frame, s, standard_dense_sequence(48)).ok);

  Frame tampered = res.frame;
  Vec e(48, cd(0.0));
  e[47] = 1.0;  // unit vector far from the construction; breaks the residual
  tampered.vectors[3] = e;
  VerifyReport rep = verify_certificate(res.cert, tampered, s, standard_dense_sequence(48));
  CHECK_FALSE(rep.ok);
  CHECK(rep.failing_step == 4);
}

TEST_CASE("empty certificate verifies vacuously") {
  Operator sh = make_shift(8);
  Certificate cert;
  cert.kind = "exact";
  cert.dim = 8;
  cert.s = 2;
  cert.max_part_norm = 1.0;
  cert.tol_attain = 1e-10;
  Frame empty;
  empty.dim = 8;
  SelfAdjointTuple s = hermitian_parts(single(sh));
  CHECK(verify_certificate(cert, empty, s, standard_dense_sequence(8)).ok);
}

TEST_CASE("m_groups > 1 splits the ledger across dense vectors") {
  Operator sh = make_shift(48);
  ConvexRegion region = we_model(disc_region({0.0, 0.0}, 0.8), sh, 0.02, 90);
  BuildOptions opts;
  opts.m_groups = 2;
  const int K = 8;
  BuildResult res = build_exact_diagonal_complex(
      single(sh), &region, constant_targets(cd(0.0), K), {},
      standard_dense_sequence(48), K, opts);
  CHECK(res.cert.groups.size() == 2);
  SelfAdjointTuple s = hermitian_parts(single(sh));
  CHECK(verify_certificate(res.cert, res.frame, s, standard_dense_sequence(48)).ok);
}
