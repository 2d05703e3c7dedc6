#include "bforge/attain.hpp"

#include <algorithm>
#include <cmath>

#include "bforge/linalg.hpp"

namespace bforge {

double default_attain_tol(int s) { return s <= 2 ? 1e-10 : 1e-8; }

namespace {

struct Compressed {
  Matrix q;                   // dim x d' complement basis, columns orthonormal
  std::vector<Matrix> parts;  // Hermitian d' x d'
  double scale = 1.0;
};

Compressed compress_to_complement(const SelfAdjointTuple& s,
                                  const std::vector<Vec>& avoid) {
  auto comp = complement_basis(avoid, s.dim);
  const int d = static_cast<int>(comp.size());
  if (d < 1) fail(ErrorKind::Input, "attain_value: complement is empty");
  Compressed c;
  c.q = Matrix(s.dim, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < s.dim; ++i) c.q(i, j) = comp[j][i];
  for (const auto& p : s.parts) {
    Matrix b = matmul('C', c.q, 'N', matmul(p, c.q));
    c.parts.push_back(hermitian_average(b));
    c.scale = std::max(c.scale, max_abs(c.parts.back()) * d);
  }
  return c;
}

Vec lift(const Compressed& c, const Vec& z) {
  Vec x = matvec(c.q, z);
  double n = norm2(x);
  if (n > 0.0) scale(x, 1.0 / n);
  return x;
}

std::vector<double> value_at(const std::vector<Matrix>& parts, const Vec& z) {
  std::vector<double> v(parts.size());
  for (size_t j = 0; j < parts.size(); ++j)
    v[j] = inner(matvec(parts[j], z), z).real();
  return v;
}

double resid2(const std::vector<double>& v, const std::vector<double>& lambda) {
  double s = 0.0;
  for (size_t i = 0; i < v.size(); ++i) s += (v[i] - lambda[i]) * (v[i] - lambda[i]);
  return std::sqrt(s);
}

// ---- s = 1: exact two-eigenvector convex interpolation ---------------------
//
// Mixing the two eigenvectors whose eigenvalues straddle the target keeps the
// extreme eigendirections untouched; long constructions then retain their
// near-boundary reach for later steps.

Vec attain_s1(const Compressed& c, double lambda) {
  const Matrix& b = c.parts[0];
  EigResult e = heig(b);
  const int d = b.rows;
  const double slack = 1e-12 * std::max(1.0, c.scale);
  if (lambda < e.values.front() - slack || lambda > e.values.back() + slack)
    fail(ErrorKind::NotAttained,
         "attain_value: target outside the compressed spectrum");
  int hi_idx = 0;
  while (hi_idx < d - 1 && e.values[hi_idx] < lambda) ++hi_idx;
  const int lo_idx = std::max(0, hi_idx - (e.values[hi_idx] >= lambda ? 1 : 0));
  const double lo = e.values[lo_idx], hi = e.values[hi_idx];
  double t = (hi - lo) <= 0.0 ? 0.0 : (lambda - lo) / (hi - lo);
  t = std::clamp(t, 0.0, 1.0);
  Vec z(d);
  for (int i = 0; i < d; ++i)
    z[i] = std::sqrt(1.0 - t) * e.vectors(i, lo_idx) +
           std::sqrt(t) * e.vectors(i, hi_idx);
  double n = norm2(z);
  scale(z, 1.0 / n);
  return z;
}

// ---- s = 2: constructive chord interpolation --------------------------------
//
// For every rotation psi write e^{-i psi}(B - zeta) = H + iG with H, G
// Hermitian. Mixing the extreme eigenvectors of H with weight t chosen so the
// H-value is exactly zero leaves one free phase; the G-value sweeps the
// interval gamma +- amp. gamma flips sign under psi -> psi + pi, so a capture
// (|gamma| <= amp) exists along the way and gives <B x, x> = zeta exactly.

struct ChordEval {
  bool outside = false;
  bool captured = false;
  double gamma = 0.0;
  Vec z;
};

enum class ChordPair {
  Nearest,      // straddling pair closest to zero: spares the extremes
  TopAnchored,  // top eigenvector with the nearest-below partner: cheap on
                // the crowded band just above the target
  Extremes,     // the classical choice; gamma continuous in psi
};

// Interpolate between an eigenpair of H = Re(e^{-i psi}(B - zeta)) that
// straddles zero; the pair policy decides which spectral mass gets consumed.
ChordEval chord_eval(const Matrix& bmat, cd zeta, double psi, double scale_,
                     ChordPair mode) {
  const int d = bmat.rows;
  const cd rot = std::exp(cd(0.0, -psi));
  Matrix h(d, d), g(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) {
      const cd v = rot * (bmat(i, j) - (i == j ? zeta : cd(0.0)));
      const cd w = std::conj(rot * (bmat(j, i) - (i == j ? zeta : cd(0.0))));
      h(i, j) = 0.5 * (v + w);
      g(i, j) = cd(0.0, -0.5) * (v - w);
    }
  EigResult e = heig(h);

  ChordEval ev;
  const double eps = 1e-13 * std::max(1.0, scale_);
  if (e.values.back() < -eps || e.values.front() > eps) {
    ev.outside = true;
    return ev;
  }
  int bi = d - 1, ai = 0;
  if (mode != ChordPair::Extremes) {
    int above = 0;
    while (above < d - 1 && e.values[above] < 0.0) ++above;
    ai = std::max(0, above - (e.values[above] >= 0.0 ? 1 : 0));
    if (e.values[ai] > 0.0) ai = above;  // whole spectrum essentially >= 0
    bi = mode == ChordPair::Nearest ? above : d - 1;
    if (bi < ai) bi = ai;
  }
  const double lo = e.values[ai], hi = e.values[bi];
  double t = (hi - lo) <= 0.0 ? 0.5 : (0.0 - lo) / (hi - lo);
  t = std::clamp(t, 0.0, 1.0);

  Vec vlo(d), vhi(d);
  for (int i = 0; i < d; ++i) {
    vlo[i] = e.vectors(i, ai);
    vhi[i] = e.vectors(i, bi);
  }
  const double g_hh = inner(matvec(g, vhi), vhi).real();
  const double g_ll = inner(matvec(g, vlo), vlo).real();
  const cd kappa = ai == bi ? cd(0.0) : inner(matvec(g, vhi), vlo);
  const double gamma = t * g_hh + (1.0 - t) * g_ll;
  const double amp = 2.0 * std::sqrt(std::max(0.0, t * (1.0 - t))) * std::abs(kappa);
  ev.gamma = gamma;

  if (std::abs(gamma) <= amp + eps) {
    double phi = 0.0;
    if (amp > 0.0) {
      const double cosv = std::clamp(-gamma / amp, -1.0, 1.0);
      phi = std::arg(kappa) - std::acos(cosv);
    }
    Vec z = vlo;
    scale(z, std::sqrt(1.0 - t) * std::exp(cd(0.0, phi)));
    axpy(z, std::sqrt(t), vhi);
    const double n = norm2(z);
    if (n > 0.0) scale(z, 1.0 / n);
    ev.captured = true;
    ev.z = std::move(z);
  }
  return ev;
}

struct GnResult {
  Vec z;
  double resid = 1e300;
};

GnResult gauss_newton(const std::vector<Matrix>& parts,
                      const std::vector<double>& lambda, Vec z, double tol_inner);

// Spread starts for the Gauss-Newton rescue: uniform water-filled mixes over
// the levels nearest the target, mean-corrected with an extreme anchor. Two-
// vector chords concentrate their mass on single spectral levels; when a long
// construction has drained those, a spread solution still exists and GN
// polishes it to machine accuracy.
// Maximum-entropy level weights w_j ~ exp(beta c_j) with the mean pinned at
// the target: the flattest spectral profile a solution can have.
std::vector<double> maxent_weights(const std::vector<double>& levels, double target) {
  const int d = static_cast<int>(levels.size());
  auto mean_at = [&](double beta) {
    double zmax = -1e300;
    for (double cj : levels) zmax = std::max(zmax, beta * cj);
    double z = 0.0, zc = 0.0;
    for (double cj : levels) {
      const double w = std::exp(beta * cj - zmax);
      z += w;
      zc += w * cj;
    }
    return zc / z;
  };
  double lo = 0.0, hi = 1.0;
  const bool up = mean_at(0.0) < target;
  if (!up) {
    // tilt downward instead
    while (hi < 1e7 && mean_at(-hi) > target) hi *= 2.0;
  } else {
    while (hi < 1e7 && mean_at(hi) < target) hi *= 2.0;
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double m = mean_at(up ? mid : -mid);
    if ((m < target) == up)
      lo = mid;
    else
      hi = mid;
  }
  const double beta = up ? 0.5 * (lo + hi) : -0.5 * (lo + hi);
  double zmax = -1e300;
  for (double cj : levels) zmax = std::max(zmax, beta * cj);
  std::vector<double> w(d);
  double z = 0.0;
  for (int j = 0; j < d; ++j) {
    w[j] = std::exp(beta * levels[j] - zmax);
    z += w[j];
  }
  for (auto& x : w) x /= z;
  return w;
}

bool spread_attempt(const Compressed& c, const EigResult& e, double target,
                    const std::vector<double>& lambda, double tol, Vec& out) {
  const int d = c.parts[0].rows;
  if (target >= e.values.back() || target <= e.values.front()) return false;
  const double tol_inner =
      std::max(1e-14 * std::max(1.0, c.scale),
               std::min(tol * 1e-2, 1e-12 * std::max(1.0, c.scale)));

  GnResult best;
  // maxent start plus a windowed backup around the target
  {
    std::vector<double> w = maxent_weights(e.values, target);
    Vec start(d, cd(0.0));
    for (int j = 0; j < d; ++j) {
      const double a = std::sqrt(w[j]);
      for (int row = 0; row < d; ++row) start[row] += a * e.vectors(row, j);
    }
    best = gauss_newton(c.parts, lambda, start, tol_inner);
  }
  if (best.resid > tol_inner) {
    std::vector<int> order(d);
    for (int i = 0; i < d; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return std::abs(e.values[a] - target) < std::abs(e.values[b] - target);
    });
    const int L = std::min(24, d);
    std::vector<double> lv(L);
    for (int i = 0; i < L; ++i) lv[i] = e.values[order[i]];
    std::vector<double> w = maxent_weights(lv, target);
    Vec start(d, cd(0.0));
    for (int i = 0; i < L; ++i) {
      const double a = std::sqrt(w[i]);
      for (int row = 0; row < d; ++row) start[row] += a * e.vectors(row, order[i]);
    }
    GnResult r = gauss_newton(c.parts, lambda, start, tol_inner);
    if (r.resid < best.resid) best = std::move(r);
  }
  if (best.resid > tol) return false;
  out = std::move(best.z);
  return true;
}

// Descend J(x) = <Theta x, x> (spectral mass above the target, weighted by
// its exceedance) along the manifold {<S x, x> = lambda, |x| = 1}. The
// polish turns any attained vector into one that leaves the scarce band as
// intact as the geometry allows.
void thrift_polish(const Compressed& c, const EigResult& e, double target,
                   const std::vector<double>& lambda, double tol, Vec& x) {
  const int d = c.parts[0].rows;
  const int s = static_cast<int>(c.parts.size());
  Matrix theta(d, d);
  bool any = false;
  for (int j = 0; j < d; ++j) {
    const double exceed = e.values[j] - target;
    if (exceed <= 0.0) continue;
    any = true;
    for (int col = 0; col < d; ++col)
      for (int row = 0; row < d; ++row)
        theta(row, col) += exceed * e.vectors(row, j) * std::conj(e.vectors(col, j));
  }
  if (!any) return;
  const double tol_inner =
      std::max(1e-14 * std::max(1.0, c.scale),
               std::min(tol * 1e-2, 1e-12 * std::max(1.0, c.scale)));

  auto cost = [&](const Vec& v) { return inner(matvec(theta, v), v).real(); };
  auto resid = [&](const Vec& v) {
    return resid2(value_at(c.parts, v), lambda);
  };

  double step = 0.25;
  for (int it = 0; it < 60 && step > 1e-6; ++it) {
    // project the cost gradient off the constraint gradients and the radius
    std::vector<Vec> rows;
    for (int j = 0; j < s; ++j) {
      Vec g = matvec(c.parts[j], x);
      scale(g, 2.0);
      rows.push_back(std::move(g));
    }
    rows.push_back(x);
    rows = orthonormalize(rows, 1e-12);
    Vec g = matvec(theta, x);
    scale(g, 2.0);
    for (const auto& r : rows) axpy(g, -inner(g, r), r);
    const double gn = norm2(g);
    if (gn <= 1e-13) break;
    scale(g, -1.0 / gn);

    const double j0 = cost(x);
    bool moved = false;
    while (step > 1e-6) {
      Vec trial = x;
      axpy(trial, cd(step, 0.0), g);
      double n = norm2(trial);
      scale(trial, 1.0 / n);
      GnResult rr = gauss_newton(c.parts, lambda, trial, tol_inner);
      if (rr.resid <= tol_inner && cost(rr.z) < j0 - 1e-15) {
        x = std::move(rr.z);
        moved = true;
        step *= 1.3;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  if (resid(x) > tol)
    fail(ErrorKind::Internal, "attain_value: thrift polish left the manifold");
}

Vec attain_s2(const Compressed& c, const std::vector<double>& lambda,
              const AttainOptions& opts, double tol) {
  const int d = c.parts[0].rows;
  Matrix bmat(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i)
      bmat(i, j) = c.parts[0](i, j) + cd(0.0, 1.0) * c.parts[1](i, j);
  const cd zeta(lambda[0], lambda[1]);

  if (d == 1) {
    if (std::abs(bmat(0, 0) - zeta) > tol)
      fail(ErrorKind::NotAttained,
           "attain_value: one-dimensional complement misses the target");
    return Vec{1.0};
  }

  // Probe the spectrum along the target's direction once; when the target
  // sits in a scarce tail of the compressed range, spread solutions must come
  // first or the chord would strip-mine the remaining extreme directions.
  cd mean(0.0);
  for (int i = 0; i < d; ++i) mean += bmat(i, i);
  mean /= static_cast<double>(d);
  const double theta = std::abs(zeta - mean) > 1e-12 ? std::arg(zeta - mean) : 0.0;
  Matrix hdir(d, d);
  const cd rot = std::exp(cd(0.0, -theta));
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i)
      hdir(i, j) = 0.5 * (rot * bmat(i, j) + std::conj(rot * bmat(j, i)));
  EigResult edir = heig(hdir);
  const double target_dir = (rot * zeta).real();
  int above = 0;
  for (double v : edir.values)
    if (v >= target_dir) ++above;
  const bool scarce = above < std::max(4, d / 8);

  Vec found;
  bool have = false;
  if (scarce) have = spread_attempt(c, edir, target_dir, lambda, tol, found);

  const int grid = 32;
  // thrifty pairing first only when the band is scarce; the nearest pair
  // captures generic interior targets within a few grid probes
  const ChordPair ladder_scarce[3] = {ChordPair::TopAnchored, ChordPair::Nearest,
                                      ChordPair::Extremes};
  const ChordPair ladder_rich[3] = {ChordPair::Nearest, ChordPair::TopAnchored,
                                    ChordPair::Extremes};
  for (int round = 0; round < 3 && !have; ++round) {
    const ChordPair mode = scarce ? ladder_scarce[round] : ladder_rich[round];
    auto bisect = [&](double a, double b, double ga) {
      for (int it = 0; it < opts.max_bisect && !have; ++it) {
        const double mid = 0.5 * (a + b);
        ChordEval ev = chord_eval(bmat, zeta, mid, c.scale, mode);
        if (ev.outside)
          fail(ErrorKind::NotAttained,
               "attain_value: target separated from the compressed range");
        if (ev.captured) {
          found = std::move(ev.z);
          have = true;
          return;
        }
        if (ev.gamma * ga <= 0.0) {
          b = mid;
        } else {
          a = mid;
          ga = ev.gamma;
        }
        if (b - a < 1e-15) return;
      }
    };
    double prev_gamma = 0.0;
    double first_gamma = 0.0;
    for (int k = 0; k < grid && !have; ++k) {
      const double psi = 2.0 * M_PI * k / grid;
      ChordEval ev = chord_eval(bmat, zeta, psi, c.scale, mode);
      if (ev.outside)
        fail(ErrorKind::NotAttained,
             "attain_value: target separated from the compressed range");
      if (ev.captured) {
        found = std::move(ev.z);
        have = true;
        break;
      }
      if (k == 0) first_gamma = ev.gamma;
      if (k > 0 && prev_gamma * ev.gamma <= 0.0)
        bisect(2.0 * M_PI * (k - 1) / grid, 2.0 * M_PI * k / grid, prev_gamma);
      prev_gamma = ev.gamma;
    }
    if (!have && prev_gamma * first_gamma <= 0.0)
      bisect(2.0 * M_PI * (grid - 1) / grid, 2.0 * M_PI, prev_gamma);
  }
  if (!have && !scarce)
    have = spread_attempt(c, edir, target_dir, lambda, tol, found);
  if (!have)
    fail(ErrorKind::NotAttained,
         "attain_value: chord search and spread rescue exhausted their budget");
  if (scarce) thrift_polish(c, edir, target_dir, lambda, tol, found);
  return found;
}

// ---- projected Gauss-Newton (rescue stage for s = 2, primary for s >= 3) ----

GnResult gauss_newton(const std::vector<Matrix>& parts,
                      const std::vector<double>& lambda, Vec z, double tol_inner) {
  const int s = static_cast<int>(parts.size());
  double n = norm2(z);
  if (n == 0.0) return {};
  scale(z, 1.0 / n);

  std::vector<double> val = value_at(parts, z);
  double res = resid2(val, lambda);
  double mu = 0.0;

  for (int it = 0; it < 80 && res > tol_inner; ++it) {
    std::vector<Vec> grad(s);
    for (int j = 0; j < s; ++j) {
      grad[j] = matvec(parts[j], z);
      scale(grad[j], 2.0);
      const double radial = inner(grad[j], z).real();
      axpy(grad[j], cd(-radial, 0.0), z);
    }
    std::vector<std::vector<double>> jjt(s, std::vector<double>(s, 0.0));
    std::vector<double> rhs(s);
    for (int i = 0; i < s; ++i) {
      rhs[i] = -(val[i] - lambda[i]);
      for (int j = i; j < s; ++j) {
        const double v = inner(grad[i], grad[j]).real();
        jjt[i][j] = v;
        jjt[j][i] = v;
      }
    }
    double diagscale = 0.0;
    for (int i = 0; i < s; ++i) diagscale = std::max(diagscale, jjt[i][i]);
    if (diagscale == 0.0) break;

    bool accepted = false;
    for (int damp = 0; damp < 10 && !accepted; ++damp) {
      auto a = jjt;
      auto b = rhs;
      for (int i = 0; i < s; ++i) a[i][i] += mu * diagscale;
      bool singular = false;
      for (int col = 0; col < s && !singular; ++col) {
        int piv = col;
        for (int i = col + 1; i < s; ++i)
          if (std::abs(a[i][col]) > std::abs(a[piv][col])) piv = i;
        std::swap(a[col], a[piv]);
        std::swap(b[col], b[piv]);
        if (std::abs(a[col][col]) < 1e-300) {
          singular = true;
          break;
        }
        for (int i = col + 1; i < s; ++i) {
          const double f = a[i][col] / a[col][col];
          for (int j = col; j < s; ++j) a[i][j] -= f * a[col][j];
          b[i] -= f * b[col];
        }
      }
      if (singular) {
        mu = std::max(1e-8, mu * 10.0);
        continue;
      }
      std::vector<double> y(s);
      for (int i = s - 1; i >= 0; --i) {
        double t = b[i];
        for (int j = i + 1; j < s; ++j) t -= a[i][j] * y[j];
        y[i] = t / a[i][i];
      }
      Vec trial = z;
      for (int j = 0; j < s; ++j) axpy(trial, cd(y[j], 0.0), grad[j]);
      const double tn = norm2(trial);
      if (tn == 0.0) {
        mu = std::max(1e-8, mu * 10.0);
        continue;
      }
      scale(trial, 1.0 / tn);
      std::vector<double> tval = value_at(parts, trial);
      const double tres = resid2(tval, lambda);
      if (tres < res) {
        z = std::move(trial);
        val = std::move(tval);
        res = tres;
        mu *= 0.25;
        if (mu < 1e-14) mu = 0.0;
        accepted = true;
      } else {
        mu = std::max(1e-8, mu * 10.0);
      }
    }
    if (!accepted) break;
  }
  GnResult r;
  r.z = std::move(z);
  r.resid = res;
  return r;
}

Vec attain_high(const Compressed& c, const std::vector<double>& lambda,
                const AttainOptions& opts, double tol) {
  const int s = static_cast<int>(c.parts.size());
  const int d = c.parts[0].rows;
  const double floor_ = 1e-14 * std::max(1.0, c.scale);
  const double tol_inner = std::max(floor_, std::min(tol * 1e-2, 1e-12 * std::max(1.0, c.scale)));

  std::vector<Vec> starts;
  for (const auto& h : opts.hint_starts) {
    if (static_cast<int>(h.size()) != c.q.rows) continue;
    Vec z = adjoint_matvec(c.q, h);
    if (norm2(z) > 1e-8) starts.push_back(std::move(z));
  }
  if (starts.empty() || d <= 256) {
    for (int j = 0; j < s && j < 6; ++j) {
      starts.push_back(heig_extreme(c.parts[j], true).second);
      starts.push_back(heig_extreme(c.parts[j], false).second);
    }
  }
  Rng rng(opts.seed * 1000003ull + 17);
  const int extra = std::min(8, std::max(0, opts.multistarts - static_cast<int>(starts.size())));
  for (int k = 0; k < extra; ++k) {
    std::vector<double> u(s);
    double un = 0.0;
    for (int j = 0; j < s; ++j) {
      u[j] = rng.normal();
      un += u[j] * u[j];
    }
    if (un == 0.0) continue;
    un = std::sqrt(un);
    Matrix m(d, d);
    for (int j = 0; j < s; ++j)
      for (size_t i = 0; i < m.a.size(); ++i) m.a[i] += (u[j] / un) * c.parts[j].a[i];
    starts.push_back(heig_extreme(m, true).second);
  }
  const size_t base = starts.size();
  for (size_t i = 1; i < base && starts.size() < static_cast<size_t>(opts.multistarts); ++i) {
    Vec mix = starts[0];
    axpy(mix, 1.0, starts[i]);
    if (norm2(mix) > 1e-8) starts.push_back(std::move(mix));
  }
  while (starts.size() < static_cast<size_t>(std::min(opts.multistarts, 12)))
    starts.push_back(rng.unit_vector(d));

  GnResult best;
  for (const auto& start : starts) {
    GnResult r = gauss_newton(c.parts, lambda, start, tol_inner);
    if (r.resid < best.resid) best = std::move(r);
    if (best.resid <= tol_inner) break;
  }
  if (best.resid > tol)
    fail(ErrorKind::NotAttained,
         "attain_value: multistart budget exhausted (best residual " +
             std::to_string(best.resid) + ")");
  return best.z;
}

}  // namespace

Vec attain_value(const SelfAdjointTuple& s, const std::vector<double>& lambda,
                 const std::vector<Vec>& avoid, const AttainOptions& opts) {
  if (static_cast<int>(lambda.size()) != s.s)
    fail(ErrorKind::Input, "attain_value: target dimension mismatch");
  if (static_cast<int>(avoid.size()) >= s.dim - s.s)
    fail(ErrorKind::Input, "attain_value: too many avoided directions");
  const double tol = opts.tol > 0.0 ? opts.tol : default_attain_tol(s.s);

  Compressed c = compress_to_complement(s, avoid);

  Vec z;
  if (s.s == 1) {
    z = attain_s1(c, lambda[0]);
  } else if (s.s == 2) {
    z = attain_s2(c, lambda, opts, tol);
  } else {
    z = attain_high(c, lambda, opts, tol);
  }

  Vec x = lift(c, z);
  const double res = resid2(tuple_value(s, x), lambda);
  if (res > tol)
    fail(ErrorKind::NotAttained,
         "attain_value: residual " + std::to_string(res) + " above tolerance");
  return x;
}

}  // namespace bforge
