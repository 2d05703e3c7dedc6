#include "bforge/builder.hpp"

#include <algorithm>
#include <cmath>

#include "bforge/linalg.hpp"
#include "bforge/moment.hpp"
#include "bforge/numrange.hpp"

namespace bforge {

namespace {

double euclid_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

double cmax_dist(const Vec& a, const Vec& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

std::vector<double> to_real(const Vec& z) {
  std::vector<double> r(2 * z.size());
  for (size_t j = 0; j < z.size(); ++j) {
    r[2 * j] = z[j].real();
    r[2 * j + 1] = z[j].imag();
  }
  return r;
}

double ln_floor(double dist2) { return std::log(std::max(dist2, 1e-300)); }

Vec unit_or_fail(const Vec& y, const char* what) {
  const double n = norm2(y);
  if (std::abs(n - 1.0) > 1e-8)
    fail(ErrorKind::Input, std::string(what) + ": vectors must be unit norm");
  Vec v = y;
  scale(v, 1.0 / n);
  return v;
}

// Cheap deterministic starting vectors for the s > 2 attain path: extreme
// eigenvectors of each part plus a spread of standard basis vectors.
std::vector<Vec> assemble_hints(const SelfAdjointTuple& s) {
  std::vector<Vec> hints;
  for (int j = 0; j < s.s && j < 6; ++j) {
    hints.push_back(heig_extreme(s.parts[j], true).second);
    hints.push_back(heig_extreme(s.parts[j], false).second);
  }
  const int spread = std::min(8, s.dim);
  for (int i = 0; i < spread; ++i) {
    Vec e(s.dim, cd(0.0));
    e[static_cast<size_t>(i) * s.dim / spread] = 1.0;
    hints.push_back(std::move(e));
  }
  return hints;
}

struct DistTracker {
  std::vector<Vec> residuals;

  void absorb(const Vec& u) {
    for (auto& r : residuals) axpy(r, -inner(r, u), u);
  }
};

}  // namespace

std::vector<std::vector<int>> partition_indices(const std::vector<double>& weights,
                                                int m_groups) {
  if (m_groups < 1) fail(ErrorKind::Input, "partition_indices: need at least one group");
  std::vector<std::vector<int>> groups(m_groups);
  std::vector<double> sums(m_groups, 0.0);
  for (size_t k = 0; k < weights.size(); ++k) {
    int best = 0;
    for (int m = 1; m < m_groups; ++m)
      if (sums[m] < sums[best]) best = m;
    groups[best].push_back(static_cast<int>(k) + 1);
    sums[best] += weights[k];
  }
  return groups;
}

BuildResult build_exact_diagonal(const SelfAdjointTuple& S,
                                 const ConvexRegion* region,
                                 const TargetSequence& targets,
                                 const DenseSequence& dense, int steps,
                                 const BuildOptions& opts) {
  if (steps < 0 || static_cast<int>(targets.points.size()) < steps)
    fail(ErrorKind::Input, "build_exact_diagonal: not enough targets for the requested steps");
  if (opts.m_groups < 1 || opts.m_groups > static_cast<int>(dense.vectors.size()))
    fail(ErrorKind::Input, "build_exact_diagonal: m_groups exceeds the dense sequence");
  for (const auto& p : targets.points)
    if (static_cast<int>(p.size()) != S.s)
      fail(ErrorKind::Input, "build_exact_diagonal: target dimension mismatch");

  std::vector<double> weights = targets.weights;
  if (weights.empty()) {
    if (region == nullptr)
      fail(ErrorKind::Input, "build_exact_diagonal: need a region or explicit weights");
    weights.reserve(targets.points.size());
    for (const auto& p : targets.points) weights.push_back(dist_to_complement(p, *region));
  }
  if (static_cast<int>(weights.size()) < steps)
    fail(ErrorKind::Input, "build_exact_diagonal: not enough weights");
  for (int k = 0; k < steps; ++k)
    if (!(weights[k] > 0.0))
      fail(ErrorKind::Geometry, "build_exact_diagonal: target " + std::to_string(k + 1) +
                                    " is not interior to the region");

  const double maxS = max_part_norm(S);
  const double tolA = opts.tol_attain > 0.0 ? opts.tol_attain : default_attain_tol(S.s);

  Certificate cert;
  cert.kind = "exact";
  cert.dim = S.dim;
  cert.s = S.s;
  cert.max_part_norm = maxS;
  cert.tol_attain = tolA;
  cert.weights.assign(weights.begin(), weights.begin() + steps);
  cert.targets.assign(targets.points.begin(), targets.points.begin() + steps);
  cert.groups = partition_indices(cert.weights, opts.m_groups);

  std::vector<int> group_of(steps + 1, 0);
  for (size_t m = 0; m < cert.groups.size(); ++m)
    for (int k : cert.groups[m]) group_of[k] = static_cast<int>(m);

  DistTracker tracker;
  for (int m = 0; m < opts.m_groups; ++m)
    tracker.residuals.push_back(unit_or_fail(dense.vectors[m], "dense sequence"));

  std::vector<Vec> hints;
  if (S.s > 2 && opts.hint_starts) hints = assemble_hints(S);

  Frame frame;
  frame.dim = S.dim;
  std::vector<double> running(opts.m_groups, 0.0);

  for (int N = 1; N <= steps; ++N) {
    const int m = group_of[N];
    const auto& lambda = targets.points[N - 1];
    const double w = weights[N - 1];

    CertStep st;
    st.k = N;
    st.group = m;
    const double t = norm2(tracker.residuals[m]);
    st.t = t;

    AttainOptions ao;
    ao.tol = tolA;
    ao.seed = opts.seed + static_cast<uint64_t>(N);
    ao.hint_starts = hints;

    Vec u;
    if (t <= 1e-12) {
      // y_m already lies in M_{N-1}: any admissible u_N works
      st.degenerate = true;
      u = attain_value(S, lambda, frame.vectors, ao);
    } else {
      Vec b = tracker.residuals[m];
      scale(b, 1.0 / t);
      reorthonormalize(b, frame.vectors);
      const std::vector<double> val_b = tuple_value(S, b);
      const double rho = euclid_dist(val_b, lambda);
      st.rho = rho;
      if (rho <= 1e-12 * std::max(1.0, maxS)) {
        u = b;
      } else {
        const double delta = 0.5 * w;
        st.delta = delta;
        st.mu.resize(S.s);
        for (int j = 0; j < S.s; ++j)
          st.mu[j] = lambda[j] - (delta / rho) * (val_b[j] - lambda[j]);
        std::vector<Vec> avoid = frame.vectors;
        avoid.push_back(b);
        for (int j = 0; j < S.s; ++j) avoid.push_back(matvec(S.parts[j], b));
        Vec x = attain_value(S, st.mu, avoid, ao);
        u = x;
        scale(u, std::sqrt(rho / (rho + delta)));
        axpy(u, std::sqrt(delta / (rho + delta)), b);
        st.step_decay = -delta / (rho + delta);
      }
    }
    reorthonormalize(u, frame.vectors);
    frame.vectors.push_back(u);
    tracker.absorb(u);
    running[m] += w;

    st.residual = euclid_dist(tuple_value(S, u), lambda);
    st.weight_sum = running[m];
    st.ln_dist2 = ln_floor(norm2(tracker.residuals[m]) * norm2(tracker.residuals[m]));
    cert.steps.push_back(std::move(st));
  }
  return {std::move(frame), std::move(cert)};
}

namespace {

struct Reduction {
  std::vector<int> pivots;                      // eliminated coordinates
  std::vector<std::vector<double>> rows;        // normalized relation rows
  std::vector<int> active;                      // surviving coordinates
};

Reduction reduce_relations(const AffineHull& hull, int s) {
  Reduction red;
  std::vector<std::vector<double>> rows = hull.relations;
  std::vector<bool> pivoted(s, false);
  for (auto& row : rows) {
    int p = -1;
    double best = 1e-10;
    for (int j = 0; j < s; ++j)
      if (!pivoted[j] && std::abs(row[j + 1]) > best) {
        best = std::abs(row[j + 1]);
        p = j;
      }
    if (p < 0) continue;
    const double f = row[p + 1];
    for (auto& v : row) v /= f;
    for (auto& other : rows) {
      if (&other == &row) continue;
      const double g = other[p + 1];
      if (g == 0.0) continue;
      for (size_t i = 0; i < other.size(); ++i) other[i] -= g * row[i];
    }
    pivoted[p] = true;
    red.pivots.push_back(p);
    red.rows.push_back(row);
  }
  for (int j = 0; j < s; ++j)
    if (!pivoted[j]) red.active.push_back(j);
  return red;
}

// Contraction factor of the coordinate-drop projection restricted to the
// hull's direction space: distances in reduced coordinates shrink by at most
// this factor, so scaled weights stay valid lower bounds.
double projection_contraction(const AffineHull& hull, const std::vector<int>& active) {
  const int h = hull.dim();
  if (h == 0) return 1.0;
  Matrix b(static_cast<int>(active.size()), h);
  for (int c = 0; c < h; ++c)
    for (size_t r = 0; r < active.size(); ++r)
      b(static_cast<int>(r), c) = hull.basis[c][active[r]];
  Matrix g = matmul('C', b, 'N', b);
  auto [lo, v] = heig_extreme(g, false);
  (void)v;
  return std::sqrt(std::max(0.0, lo));
}

}  // namespace

BuildResult build_exact_diagonal_complex(const OperatorTuple& T,
                                         const ConvexRegion* region,
                                         const std::vector<Vec>& targets,
                                         const std::vector<double>& explicit_weights,
                                         const DenseSequence& dense, int steps,
                                         const BuildOptions& opts) {
  if (static_cast<int>(targets.size()) < steps)
    fail(ErrorKind::Input, "build_exact_diagonal_complex: not enough targets");
  SelfAdjointTuple S = hermitian_parts(T);
  const int s = S.s;
  AffineHull hull = affine_hull(S);
  Reduction red = reduce_relations(hull, s);

  std::vector<std::vector<double>> real_targets;
  real_targets.reserve(targets.size());
  double lam_scale = 1.0;
  for (const auto& z : targets) {
    if (static_cast<int>(z.size()) != T.n)
      fail(ErrorKind::Input, "build_exact_diagonal_complex: target tuple length mismatch");
    real_targets.push_back(to_real(z));
    for (const auto& c : z) lam_scale = std::max(lam_scale, std::abs(c));
  }

  // every target must satisfy every detected relation
  for (size_t r = 0; r < red.rows.size(); ++r) {
    const auto& row = red.rows[r];
    const int p = red.pivots[r];
    for (int k = 0; k < steps; ++k) {
      double predicted = -row[0];
      for (int j = 0; j < s; ++j)
        if (j != p) predicted -= row[j + 1] * real_targets[k][j];
      if (std::abs(real_targets[k][p] - predicted) > 1e-8 * lam_scale)
        fail(ErrorKind::RelationMismatch,
             "target " + std::to_string(k + 1) + " violates an affine relation of the tuple");
    }
  }

  if (red.active.empty()) {
    // tuple of scalars: the range is one forced point, any basis works
    Frame frame;
    frame.dim = S.dim;
    Certificate cert;
    cert.kind = "exact";
    cert.dim = S.dim;
    cert.s = 0;
    cert.max_part_norm = max_part_norm(S);
    cert.tol_attain = opts.tol_attain > 0.0 ? opts.tol_attain : default_attain_tol(2);
    cert.pivots = red.pivots;
    cert.relations = red.rows;
    for (int k = 0; k < steps && k < S.dim; ++k) {
      Vec e(S.dim, cd(0.0));
      e[k] = 1.0;
      frame.vectors.push_back(std::move(e));
      CertStep st;
      st.k = k + 1;
      cert.steps.push_back(st);
    }
    return {std::move(frame), std::move(cert)};
  }

  SelfAdjointTuple Sred;
  Sred.s = static_cast<int>(red.active.size());
  Sred.dim = S.dim;
  for (int j : red.active) Sred.parts.push_back(S.parts[j]);

  TargetSequence seq;
  for (int k = 0; k < steps; ++k) {
    std::vector<double> pt(red.active.size());
    for (size_t j = 0; j < red.active.size(); ++j) pt[j] = real_targets[k][red.active[j]];
    seq.points.push_back(std::move(pt));
  }

  const ConvexRegion* reduced_region = nullptr;
  if (!explicit_weights.empty()) {
    if (static_cast<int>(explicit_weights.size()) < steps)
      fail(ErrorKind::Input, "build_exact_diagonal_complex: not enough weights");
    seq.weights.assign(explicit_weights.begin(), explicit_weights.begin() + steps);
  } else {
    if (region == nullptr)
      fail(ErrorKind::Input, "build_exact_diagonal_complex: need a region or weights");
    if (region->ambient == s) {
      const double contraction = projection_contraction(hull, red.active);
      for (int k = 0; k < steps; ++k) {
        const double w = dist_to_complement(real_targets[k], *region, &hull);
        seq.weights.push_back(w * contraction);
      }
    } else if (region->ambient == Sred.s) {
      reduced_region = region;
    } else {
      fail(ErrorKind::Input,
           "build_exact_diagonal_complex: region ambient matches neither full nor reduced coordinates");
    }
  }

  BuildResult res = build_exact_diagonal(Sred, reduced_region, seq, dense, steps, opts);
  res.cert.pivots = red.pivots;
  res.cert.relations = red.rows;

  double full_res = 0.0;
  for (int k = 0; k < steps; ++k)
    full_res = std::max(full_res, cmax_dist(tuple_value(T, res.frame.vectors[k]), targets[k]));
  res.cert.flags["full_residual_max"] = std::to_string(full_res);
  return res;
}

namespace {

Vec attain_with_inward_fallback(const SelfAdjointTuple& S2n,
                                const OperatorTuple& T, const Vec& lambda_c,
                                const std::vector<Vec>& avoid, double half_alpha,
                                const ConvexRegion* region, const AttainOptions& ao) {
  const std::vector<double> lam = to_real(lambda_c);
  try {
    return attain_value(S2n, lam, avoid, ao);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NotAttained || region == nullptr) throw;
  }
  // Nudge the target toward the region center; the budget is half the step's
  // alpha, so the contract ||<T v, v> - lambda|| <= |alpha|/2 still holds.
  const std::vector<double> center = region_center(*region);
  std::vector<double> dir(lam.size());
  double dn = 0.0;
  for (size_t i = 0; i < lam.size(); ++i) {
    dir[i] = center[i] - lam[i];
    dn += dir[i] * dir[i];
  }
  dn = std::sqrt(dn);
  if (dn <= 1e-15) throw Error(ErrorKind::NotAttained, "approx build: center fallback degenerate");
  // deepest admissible shift first: each step then consumes the lowest band
  // it may, preserving near-boundary reach for the later, tighter steps
  for (double frac : {0.999, 0.75, 0.5, 0.25}) {
    const double shift = std::min(frac * half_alpha, dn);
    std::vector<double> shifted(lam.size());
    for (size_t i = 0; i < lam.size(); ++i) shifted[i] = lam[i] + dir[i] / dn * shift;
    try {
      Vec v = attain_value(S2n, shifted, avoid, ao);
      if (cmax_dist(tuple_value(T, v), lambda_c) <= half_alpha + 1e-12) return v;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NotAttained) throw;
    }
  }
  fail(ErrorKind::NotAttained,
       "approx build: the half-alpha attainment step is unreachable in this truncation");
}

// Soft mode: the nearest value the truncation still attains along the
// segment from the target toward the region center. The reach is the top of
// the compressed spectrum in that direction; a small margin leaves room for
// the transverse coordinates.
Vec attain_nearest_reachable(const SelfAdjointTuple& S2n, const OperatorTuple& T,
                             const Vec& lambda_c, const std::vector<Vec>& avoid,
                             const ConvexRegion& region, const AttainOptions& ao,
                             double min_shift) {
  (void)T;
  const std::vector<double> lam = to_real(lambda_c);
  const std::vector<double> center = region_center(region);
  std::vector<double> u(lam.size());
  double dn = 0.0;
  for (size_t i = 0; i < lam.size(); ++i) {
    u[i] = center[i] - lam[i];
    dn += u[i] * u[i];
  }
  dn = std::sqrt(dn);
  if (dn <= 1e-15)
    fail(ErrorKind::NotAttained, "approx build: saturated step has no inward direction");
  for (auto& x : u) x /= dn;

  // reach of the compressed range in the outward direction (-u, toward the
  // target): the support value the truncation can still deliver
  auto comp = complement_basis(avoid, S2n.dim);
  Matrix q(S2n.dim, static_cast<int>(comp.size()));
  for (size_t j = 0; j < comp.size(); ++j)
    for (int i = 0; i < S2n.dim; ++i) q(i, static_cast<int>(j)) = comp[j][i];
  Matrix dirm(static_cast<int>(comp.size()), static_cast<int>(comp.size()));
  for (int j = 0; j < S2n.s; ++j) {
    if (u[j] == 0.0) continue;
    Matrix part = hermitian_average(matmul('C', q, 'N', matmul(S2n.parts[j], q)));
    for (size_t i = 0; i < dirm.a.size(); ++i) dirm.a[i] -= u[j] * part.a[i];
  }
  const double reach_out = heig_extreme(dirm, true).first;

  double t0 = 0.0;
  for (size_t i = 0; i < lam.size(); ++i) t0 -= u[i] * lam[i];
  for (double margin : {1e-4, 5e-4, 2e-3, 1e-2, 5e-2}) {
    double shift = t0 - reach_out + margin;
    shift = std::max(shift, min_shift);
    if (shift > dn) break;
    std::vector<double> p(lam.size());
    for (size_t i = 0; i < lam.size(); ++i) p[i] = lam[i] + shift * u[i];
    try {
      return attain_value(S2n, p, avoid, ao);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NotAttained) throw;
    }
  }
  fail(ErrorKind::NotAttained, "approx build: saturated step is unreachable entirely");
}

}  // namespace

BuildResult build_approx_diagonal(const OperatorTuple& T,
                                  const std::vector<Vec>& targets,
                                  const std::vector<double>& alphas,
                                  const ConvexRegion* region,
                                  const DenseSequence& dense, int steps,
                                  const BuildOptions& opts) {
  if (static_cast<int>(targets.size()) < steps || static_cast<int>(alphas.size()) < steps)
    fail(ErrorKind::Input, "build_approx_diagonal: not enough targets or alphas");
  if (opts.m_groups < 1 || opts.m_groups > static_cast<int>(dense.vectors.size()))
    fail(ErrorKind::Input, "build_approx_diagonal: m_groups exceeds the dense sequence");
  for (int k = 0; k < steps; ++k)
    if (alphas[k] == 0.0)
      fail(ErrorKind::Input, "build_approx_diagonal: alpha_k must be nonzero");
  if (region)
    for (int k = 0; k < steps; ++k)
      if (!region_contains(*region, to_real(targets[k]), 1e-9))
        fail(ErrorKind::Geometry,
             "build_approx_diagonal: target " + std::to_string(k + 1) + " escapes the region");

  SelfAdjointTuple S2n = hermitian_parts(T);
  const double maxT = max_part_norm(T);
  const double tolA = opts.tol_attain > 0.0 ? opts.tol_attain : default_attain_tol(S2n.s);

  Certificate cert;
  cert.kind = "approx";
  cert.dim = T.dim;
  cert.s = S2n.s;
  cert.max_part_norm = maxT;
  cert.tol_attain = tolA;
  for (int k = 0; k < steps; ++k) {
    cert.weights.push_back(std::abs(alphas[k]));
    cert.targets.push_back(to_real(targets[k]));
  }
  cert.groups = partition_indices(cert.weights, opts.m_groups);
  std::vector<int> group_of(steps + 1, 0);
  for (size_t m = 0; m < cert.groups.size(); ++m)
    for (int k : cert.groups[m]) group_of[k] = static_cast<int>(m);

  DistTracker tracker;
  for (int m = 0; m < opts.m_groups; ++m)
    tracker.residuals.push_back(unit_or_fail(dense.vectors[m], "dense sequence"));

  std::vector<Vec> hints;
  if (S2n.s > 2 && opts.hint_starts) hints = assemble_hints(S2n);

  Frame frame;
  frame.dim = T.dim;
  std::vector<double> running(opts.m_groups, 0.0);
  bool prev_saturated = false;

  for (int N = 1; N <= steps; ++N) {
    const int m = group_of[N];
    const Vec& lam = targets[N - 1];
    const double alpha = std::abs(alphas[N - 1]);

    CertStep st;
    st.k = N;
    st.group = m;
    const double t = norm2(tracker.residuals[m]);
    st.t = t;

    AttainOptions ao;
    ao.tol = tolA;
    ao.seed = opts.seed + static_cast<uint64_t>(N);
    ao.hint_starts = hints;

    const double c = maxT == 0.0 ? 1.0 : std::min(1.0, std::sqrt(alpha / (4.0 * maxT)));
    st.c = c;

    Vec u;
    if (t <= 1e-12) {
      st.degenerate = true;
      u = attain_with_inward_fallback(S2n, T, lam, frame.vectors, 0.5 * alpha, region, ao);
    } else {
      Vec b = tracker.residuals[m];
      scale(b, 1.0 / t);
      reorthonormalize(b, frame.vectors);
      const Vec val_b = tuple_value(T, b);
      st.rho = cmax_dist(val_b, lam);
      if (c >= 1.0) {
        u = b;
      } else {
        std::vector<Vec> avoid = frame.vectors;
        avoid.push_back(b);
        for (const auto& part : T.parts) {
          avoid.push_back(matvec(part, b));
          avoid.push_back(adjoint_matvec(part, b));
        }
        // the mixing error is exactly c^2 <(T b,b) - (T v,v)>, so the inner
        // step may spend everything the actual drift leaves of alpha; this is
        // never looser than the alpha/2 split and usually much roomier
        const double c2 = c * c;
        const double budget = (alpha - c2 * st.rho) / (1.0 + c2);
        Vec v;
        if (prev_saturated && opts.soft_alpha && region != nullptr) {
          // once the boundary chase saturates it stays saturated; skip the
          // doomed strict ladder and go straight to the reachable value
          v = attain_nearest_reachable(S2n, T, lam, avoid, *region, ao, budget);
          st.saturated = true;
        } else {
          try {
            v = attain_with_inward_fallback(S2n, T, lam, avoid, budget, region, ao);
          } catch (const Error& e) {
            if (!opts.soft_alpha || region == nullptr ||
                e.kind() != ErrorKind::NotAttained)
              throw;
            v = attain_nearest_reachable(S2n, T, lam, avoid, *region, ao, budget);
            st.saturated = true;
          }
        }
        u = b;
        scale(u, c);
        axpy(u, std::sqrt(1.0 - c * c), v);
        st.step_decay = -c * c;
      }
    }
    reorthonormalize(u, frame.vectors);
    frame.vectors.push_back(u);
    tracker.absorb(u);
    running[m] += alpha;

    st.residual = cmax_dist(tuple_value(T, u), lam);
    if (!st.saturated && st.residual > alpha + 1e-12)
      fail(ErrorKind::NotAttained, "build_approx_diagonal: step " + std::to_string(N) +
                                       " exceeds its alpha bound");
    st.weight_sum = running[m];
    st.ln_dist2 = ln_floor(norm2(tracker.residuals[m]) * norm2(tracker.residuals[m]));
    prev_saturated = st.saturated;
    cert.steps.push_back(std::move(st));
  }
  return {std::move(frame), std::move(cert)};
}

SchattenResult build_schatten_perturbation(const OperatorTuple& T,
                                           const std::vector<Vec>& targets,
                                           double p, const ConvexRegion& region,
                                           const DenseSequence& dense, int steps,
                                           const BuildOptions& opts) {
  if (!(p > 1.0))
    fail(ErrorKind::Input, "build_schatten_perturbation: the hypothesis requires p > 1");
  if (static_cast<int>(targets.size()) < steps)
    fail(ErrorKind::Input, "build_schatten_perturbation: not enough targets");

  SchattenResult out;
  std::vector<Vec> projected;
  std::vector<double> alphas;
  for (int k = 0; k < steps; ++k) {
    const std::vector<double> real = to_real(targets[k]);
    const std::vector<double> near = nearest_point(region, real);
    Vec lamp(targets[k].size());
    for (size_t j = 0; j < lamp.size(); ++j) lamp[j] = cd(near[2 * j], near[2 * j + 1]);
    projected.push_back(std::move(lamp));
    alphas.push_back(1.0 / static_cast<double>(k + 1));
  }

  BuildOptions soft = opts;
  soft.soft_alpha = true;
  BuildResult base = build_approx_diagonal(T, projected, alphas, &region, dense, steps, soft);
  out.frame = std::move(base.frame);
  out.cert = std::move(base.cert);
  out.cert.kind = "schatten";
  out.cert.flags["p"] = std::to_string(p);
  int saturated = 0;
  for (const auto& st : out.cert.steps)
    if (st.saturated) ++saturated;
  if (saturated > 0) out.cert.flags["saturated_steps"] = std::to_string(saturated);
  out.report.projected_targets = std::move(projected);

  double ksum = 0.0, bsum = 0.0;
  for (int k = 0; k < steps; ++k) {
    const Vec value = tuple_value(T, out.frame.vectors[k]);
    Vec kappa(value.size());
    for (size_t j = 0; j < value.size(); ++j) kappa[j] = targets[k][j] - value[j];
    double knorm = 0.0, drift = 0.0;
    for (size_t j = 0; j < value.size(); ++j) {
      knorm = std::max(knorm, std::abs(kappa[j]));
      drift = std::max(drift, std::abs(targets[k][j] - out.report.projected_targets[k][j]));
    }
    ksum += std::pow(knorm, p);
    bsum += std::pow(drift + 1.0 / static_cast<double>(k + 1), p);
    out.report.kappas.push_back(std::move(kappa));
    out.report.kappa_partial.push_back(ksum);
    out.report.bound_partial.push_back(bsum);
  }
  return out;
}

BuildResult build_power_diagonal(const Operator& T, const Vec& lambdas, int n,
                                 const ConvexRegion& rho_model,
                                 const DenseSequence& dense, int steps,
                                 const BuildOptions& opts) {
  if (n < 1) fail(ErrorKind::Input, "build_power_diagonal: n must be >= 1");
  if (rho_model.shape != ConvexRegion::Shape::Disc || rho_model.ambient != 2)
    fail(ErrorKind::Input, "build_power_diagonal: the spectral surrogate must be a disc");
  if (static_cast<int>(lambdas.size()) < steps)
    fail(ErrorKind::Input, "build_power_diagonal: not enough targets");

  const cd center(rho_model.center[0], rho_model.center[1]);
  std::vector<double> weights;
  std::vector<Vec> power_targets;
  for (int k = 0; k < steps; ++k) {
    const double d = rho_model.radius - std::abs(lambdas[k] - center);
    if (!(d > 0.0))
      fail(ErrorKind::Geometry, "build_power_diagonal: target " + std::to_string(k + 1) +
                                    " is not strictly inside the spectral disc");
    weights.push_back(hull_distance_lower_bound(lambdas[k], std::min(d, 1.0), n));
    Vec pt(n);
    cd acc = 1.0;
    for (int j = 0; j < n; ++j) {
      acc *= lambdas[k];
      pt[j] = acc;
    }
    power_targets.push_back(std::move(pt));
  }

  OperatorTuple Tn = power_tuple(T, n);
  BuildResult res =
      build_exact_diagonal_complex(Tn, nullptr, power_targets, weights, dense, steps, opts);
  res.cert.kind = "power";
  res.cert.flags["n"] = std::to_string(n);

  // flag weak divergence of the finite-horizon weight sums
  double total = 0.0, tail = 0.0;
  for (int k = 0; k < steps; ++k) {
    total += weights[k];
    if (k >= (3 * steps) / 4) tail += weights[k];
  }
  if (total > 0.0 && tail < 0.005 * total) res.cert.flags["blaschke_trend"] = "summable-trend";
  return res;
}

VerifyReport verify_certificate(const Certificate& cert, const Frame& frame,
                                const SelfAdjointTuple& S,
                                const DenseSequence& dense) {
  VerifyReport rep;
  const int K = static_cast<int>(cert.steps.size());
  if (frame.size() < K) {
    rep.ok = false;
    rep.failing_step = 0;
    rep.reason = "frame shorter than the certificate";
    return rep;
  }
  const bool complex_norm = cert.kind == "approx" || cert.kind == "schatten";

  // orthonormality, blamed on the first offending vector
  for (int k = 0; k < K; ++k) {
    if (std::abs(norm2(frame.vectors[k]) - 1.0) > frame.tol_ortho) {
      rep.ok = false;
      rep.failing_step = k + 1;
      rep.reason = "frame vector is not unit norm";
      return rep;
    }
    for (int j = 0; j < k; ++j)
      if (std::abs(inner(frame.vectors[k], frame.vectors[j])) > frame.tol_ortho) {
        rep.ok = false;
        rep.failing_step = k + 1;
        rep.reason = "frame orthogonality failure";
        return rep;
      }
  }

  // diagonal residuals
  for (int k = 0; k < K; ++k) {
    if (cert.steps[k].degenerate && cert.targets.empty()) continue;
    if (static_cast<int>(cert.targets.size()) <= k) break;
    const auto& target = cert.targets[k];
    if (static_cast<int>(target.size()) != S.s) {
      rep.ok = false;
      rep.failing_step = k + 1;
      rep.reason = "certificate target dimension mismatch";
      return rep;
    }
    const std::vector<double> val = tuple_value(S, frame.vectors[k]);
    double resid = 0.0;
    if (complex_norm) {
      for (size_t j = 0; j + 1 < val.size(); j += 2)
        resid = std::max(resid, std::hypot(val[j] - target[j], val[j + 1] - target[j + 1]));
    } else {
      resid = euclid_dist(val, target);
    }
    double bound = complex_norm ? cert.weights[k] : cert.tol_attain;
    if (cert.steps[k].saturated && cert.kind == "schatten")
      bound = std::max(bound, cert.steps[k].residual);  // consistency only
    if (resid > bound * (1.0 + 1e-9) + 1e-13 * std::max(1.0, cert.max_part_norm)) {
      rep.ok = false;
      rep.failing_step = k + 1;
      rep.reason = "diagonal residual above the certified bound";
      return rep;
    }
  }

  // distance ledger for every group against the logged inequality, plus the
  // per-step decay bound at the steps of each group
  const double denom = 4.0 * std::max(cert.max_part_norm, 1e-300);
  for (size_t m = 0; m < cert.groups.size(); ++m) {
    if (m >= dense.vectors.size()) break;
    Vec r = dense.vectors[m];
    double wsum = 0.0;
    double prev_d2 = norm2(r) * norm2(r);
    std::vector<bool> mine(K + 1, false);
    for (int k : cert.groups[m])
      if (k <= K) mine[k] = true;
    for (int N = 1; N <= K; ++N) {
      axpy(r, -inner(r, frame.vectors[N - 1]), frame.vectors[N - 1]);
      if (mine[N]) wsum += cert.weights[N - 1];
      const double d2 = norm2(r) * norm2(r);
      const double lhs = std::log(std::max(d2, 1e-300));
      if (lhs > -wsum / denom + cert.slack) {
        rep.ok = false;
        rep.failing_step = N;
        rep.reason = "distance ledger inequality fails for group " + std::to_string(m);
        return rep;
      }
      if (mine[N]) {
        const double logged = cert.steps[N - 1].ln_dist2;
        if (std::abs(lhs - logged) > 1e-6 * std::max(1.0, std::abs(logged)) + 1e-6) {
          rep.ok = false;
          rep.failing_step = N;
          rep.reason = "logged distance disagrees with the recomputation";
          return rep;
        }
        const double decay = cert.steps[N - 1].step_decay;
        if (decay < 0.0 && prev_d2 > 1e-250 &&
            std::log(std::max(d2, 1e-300) / prev_d2) > decay + cert.slack) {
          rep.ok = false;
          rep.failing_step = N;
          rep.reason = "per-step decay bound fails";
          return rep;
        }
      }
      prev_d2 = d2;
    }
  }
  return rep;
}

}  // namespace bforge
