#include "bforge/pinching.hpp"

#include <algorithm>
#include <cmath>

#include "bforge/attain.hpp"
#include "bforge/linalg.hpp"

namespace bforge {

namespace {

// banded matvec using the operator's band metadata
Vec banded_apply(const Operator& op, const Vec& v) {
  if (!op.banded()) return matvec(op.mat, v);
  const int n = op.dim, bw = op.bandwidth;
  Vec r(n, cd(0.0));
  for (int j = 0; j < n; ++j) {
    if (v[j] == cd(0.0)) continue;
    const int lo = std::max(0, j - bw), hi = std::min(n - 1, j + bw);
    for (int i = lo; i <= hi; ++i) r[i] += op.mat(i, j) * v[j];
  }
  return r;
}

std::vector<double> to_real_pt(const Vec& z) {
  std::vector<double> r(2 * z.size());
  for (size_t j = 0; j < z.size(); ++j) {
    r[2 * j] = z[j].real();
    r[2 * j + 1] = z[j].imag();
  }
  return r;
}

// Exact local powers: entries <T^k e_b, e_a> for a, b inside [lo, hi) widened
// enough that no band path escapes the slice.
std::vector<Matrix> slice_powers(const Operator& op, int lo, int hi, int npow) {
  const int m = hi - lo;
  Matrix s(m, m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) s(i, j) = op.mat(lo + i, lo + j);
  std::vector<Matrix> pows;
  pows.push_back(s);
  for (int k = 2; k <= npow; ++k) pows.push_back(matmul(pows.back(), s));
  return pows;
}

struct LocalProblem {
  std::vector<int> idx;        // sorted global indices of the sub-span
  OperatorTuple local_tuple;   // compressions of T^1..T^n onto the sub-span
};

LocalProblem make_local_problem(const Operator& op, const std::vector<int>& idx,
                                int npow) {
  LocalProblem lp;
  lp.idx = idx;
  const int lo0 = idx.front(), hi0 = idx.back() + 1;
  const int pad = npow * std::max(0, op.bandwidth);
  const int lo = std::max(0, lo0 - pad), hi = std::min(op.dim, hi0 + pad);
  std::vector<Matrix> pows = slice_powers(op, lo, hi, npow);
  lp.local_tuple.n = npow;
  lp.local_tuple.dim = static_cast<int>(idx.size());
  for (int k = 0; k < npow; ++k) {
    Matrix m(lp.local_tuple.dim, lp.local_tuple.dim);
    for (size_t b = 0; b < idx.size(); ++b)
      for (size_t a = 0; a < idx.size(); ++a)
        m(static_cast<int>(a), static_cast<int>(b)) =
            pows[k](idx[a] - lo, idx[b] - lo);
    lp.local_tuple.parts.push_back(std::move(m));
  }
  return lp;
}

// Attain a C^n tuple target on a separated-window sub-span, exactly
// orthogonal to the window slices of the avoid set.
Vec subspan_attain(const Operator& op, const LocalProblem& lp, const Vec& target,
                   const std::vector<Vec>& avoid_global, double tol,
                   uint64_t seed) {
  const int sz = static_cast<int>(lp.idx.size());
  std::vector<Vec> avoid_local;
  for (const auto& q : avoid_global) {
    Vec a(sz);
    double n2 = 0.0;
    for (int i = 0; i < sz; ++i) {
      a[i] = q[lp.idx[i]];
      n2 += std::norm(a[i]);
    }
    if (std::sqrt(n2) > 1e-13) avoid_local.push_back(std::move(a));
  }
  SelfAdjointTuple s = hermitian_parts(lp.local_tuple);

  AttainOptions ao;
  ao.tol = tol;
  ao.seed = seed;
  if (s.s > 2) {
    // coherent truncated geometric vectors make strong starts on shift-like
    // windows; harmless elsewhere
    for (int ph = 0; ph < 4; ++ph) {
      const cd mu = 0.7 * std::exp(cd(0.0, 2.0 * M_PI * ph / 4.0));
      Vec h(sz);
      cd acc = 1.0;
      for (int i = 0; i < sz; ++i) {
        h[i] = acc;
        acc *= mu;
      }
      ao.hint_starts.push_back(std::move(h));
    }
    for (int i = 0; i < std::min(6, sz); ++i) {
      Vec e(sz, cd(0.0));
      e[static_cast<size_t>(i) * sz / std::min(6, sz)] = 1.0;
      ao.hint_starts.push_back(std::move(e));
    }
    // hint starts for the compressed problem are ambient-dimension vectors
    // in attain_value; here the ambient IS the sub-span
  }
  Vec z = attain_value(s, to_real_pt(target), avoid_local, ao);
  Vec x(op.dim, cd(0.0));
  for (int i = 0; i < sz; ++i) x[lp.idx[i]] = z[i];
  return x;
}

std::vector<int> window_run_indices(const std::vector<std::pair<int, int>>& windows,
                                    size_t first, size_t count) {
  std::vector<int> idx;
  for (size_t w = first; w < first + count && w < windows.size(); ++w)
    for (int i = windows[w].first; i < windows[w].second; ++i) idx.push_back(i);
  return idx;
}

int auto_window_size(int accuracy_levels, double shrink) {
  const double need = (1.0 - 1.0 / (2.5 * accuracy_levels)) / (1.0 - shrink);
  for (int w = 4; w < 4096; ++w)
    if (std::cos(M_PI / (w + 1)) >= need) return w;
  fail(ErrorKind::Input, "split: unreachable window accuracy");
}

}  // namespace

Matrix power_compress(const Matrix& t_mat, const Frame& basis, int power) {
  const int k = basis.size();
  Matrix r(k, k);
  for (int b = 0; b < k; ++b) {
    Vec tb = basis.vectors[b];
    for (int p = 0; p < power; ++p) tb = matvec(t_mat, tb);
    for (int a = 0; a < k; ++a) r(a, b) = inner(tb, basis.vectors[a]);
  }
  return r;
}

std::vector<SplitGroup> split_subspaces(const Operator& t, int m,
                                        const SplitOptions& opts) {
  if (m < 1) fail(ErrorKind::Input, "split_subspaces: need at least one subspace");
  if (opts.circle_targets < 1 || opts.accuracy_levels < 1 || opts.powers < 1)
    fail(ErrorKind::Input, "split_subspaces: bad option values");

  std::vector<SplitGroup> groups(m);

  if (t.banded()) {
    const int w = opts.window > 0 ? opts.window
                                  : auto_window_size(opts.accuracy_levels, opts.shrink);
    const int stride = w + opts.powers * std::max(1, t.bandwidth) + 1;
    const int per_group = opts.circle_targets * opts.accuracy_levels;
    int cursor = 0;
    for (int g = 0; g < m; ++g) {
      int witness = 0;
      for (int si = 0; si < opts.circle_targets; ++si)
        for (int j = 1; j <= opts.accuracy_levels; ++j, ++witness) {
          if (cursor + w > t.dim)
            fail(ErrorKind::NotAttained,
                 "split_subspaces: truncation exhausted at witness " +
                     std::to_string(g * per_group + witness + 1));
          const auto wrange = std::make_pair(cursor, cursor + w);
          cursor += stride;
          groups[g].windows.push_back(wrange);

          const cd circle = std::exp(cd(0.0, 2.0 * M_PI * si / opts.circle_targets));
          const double rw = std::cos(M_PI / (w + 1)) * (1.0 - opts.shrink);
          const cd target = circle * std::min(1.0 - 1.0 / (2.0 * j), rw);

          std::vector<int> idx;
          for (int i = wrange.first; i < wrange.second; ++i) idx.push_back(i);
          LocalProblem lp = make_local_problem(t, idx, 1);
          Vec x = subspan_attain(t, lp, Vec{target}, {}, 1e-10,
                                 opts.seed + static_cast<uint64_t>(cursor));
          const double acc = 1.0 / j;
          Vec vals(opts.powers);
          Vec tx = x;
          for (int p = 0; p < opts.powers; ++p) {
            tx = banded_apply(t, tx);
            vals[p] = inner(tx, x);
          }
          if (std::abs(vals[0] - circle) >= acc)
            fail(ErrorKind::NotAttained,
                 "split_subspaces: witness misses its circle target at accuracy " +
                     std::to_string(acc));
          groups[g].witnesses.dim = t.dim;
          groups[g].witnesses.vectors.push_back(std::move(x));
          groups[g].witness_values.push_back(std::move(vals));
          groups[g].witness_targets.push_back(circle);
          groups[g].accuracies.push_back(acc);
        }
    }
    return groups;
  }

  // Non-banded fallback: sequential attainment against all prior witnesses.
  SelfAdjointTuple s = hermitian_parts(single(t));
  std::vector<Vec> all;
  for (int g = 0; g < m; ++g) {
    groups[g].witnesses.dim = t.dim;
    for (int si = 0; si < opts.circle_targets; ++si)
      for (int j = 1; j <= opts.accuracy_levels; ++j) {
        const cd circle = std::exp(cd(0.0, 2.0 * M_PI * si / opts.circle_targets));
        // aim as close to the circle as the truncation allows
        Vec x;
        bool got = false;
        for (double pull : {1.0 - 1.0 / (2.0 * j), 0.9 - 1.0 / (2.0 * j), 0.5}) {
          if (pull <= 0.0) continue;
          AttainOptions ao;
          ao.tol = 1e-10;
          ao.seed = opts.seed + g * 1000 + si * 10 + j;
          try {
            x = attain_value(s, {pull * circle.real(), pull * circle.imag()}, all, ao);
            got = true;
            break;
          } catch (const Error& e) {
            if (e.kind() != ErrorKind::NotAttained) throw;
          }
        }
        if (!got)
          fail(ErrorKind::NotAttained, "split_subspaces: witness unattainable in this truncation");
        Vec vals(opts.powers);
        Vec tx = x;
        for (int p = 0; p < opts.powers; ++p) {
          tx = matvec(t.mat, tx);
          vals[p] = inner(tx, x);
        }
        if (std::abs(vals[0] - circle) >= 1.0 / j)
          fail(ErrorKind::NotAttained, "split_subspaces: witness misses its accuracy bound");
        all.push_back(x);
        groups[g].witnesses.vectors.push_back(std::move(x));
        groups[g].witness_values.push_back(std::move(vals));
        groups[g].witness_targets.push_back(circle);
        groups[g].accuracies.push_back(1.0 / j);
      }
  }
  return groups;
}

Matrix bourin_correction(const Matrix& c, double rho, cd tau, int x_index) {
  if (!c.square() || c.rows < 1) fail(ErrorKind::Input, "bourin_correction: bad block shape");
  if (x_index < 0 || x_index >= c.rows)
    fail(ErrorKind::Input, "bourin_correction: x_index out of range");
  const double cnorm = opnorm(c);
  if (cnorm >= 1.0) fail(ErrorKind::Input, "bourin_correction: ||C|| < 1 required");
  if (!(rho >= 0.0) || rho >= 1.0)
    fail(ErrorKind::Input, "bourin_correction: rho must lie in [0, 1)");

  const int r = c.rows;
  const double gamma = 1.0 / std::sqrt(1.0 - rho * rho);
  Matrix out(r, r);
  for (int j = 0; j < r; ++j)
    for (int i = 0; i < r; ++i) {
      const bool pi = (i == x_index), pj = (j == x_index);
      if (!pi && !pj)
        out(i, j) = c(i, j);
      else if (pi != pj)
        out(i, j) = gamma * c(i, j);
      else
        out(i, j) = (c(i, j) - rho * rho * tau) / (1.0 - rho * rho);
    }
  return out;
}

Frame glue_block(const Matrix& t_mat, const Matrix& c, const Frame& kprime,
                 const Vec& b, double rho, int x_index, double tol_pinch) {
  const int r = kprime.size();
  if (r != c.rows) fail(ErrorKind::Input, "glue_block: frame size does not match the block");
  if (x_index < 0 || x_index >= r) fail(ErrorKind::Input, "glue_block: x_index out of range");
  const Vec tb = matvec(t_mat, b);
  const Vec tsb = adjoint_matvec(t_mat, b);
  for (const auto& k : kprime.vectors) {
    if (std::abs(inner(k, b)) > 1e-10 || std::abs(inner(k, tb)) > 1e-10 ||
        std::abs(inner(k, tsb)) > 1e-10)
      fail(ErrorKind::Geometry,
           "glue_block: realized frame is not orthogonal to b, Tb, T*b");
  }

  Frame k = kprime;
  Vec v = kprime.vectors[x_index];
  scale(v, std::sqrt(1.0 - rho * rho));
  axpy(v, rho, b);
  const double n = norm2(v);
  if (std::abs(n - 1.0) > 1e-10) fail(ErrorKind::Internal, "glue_block: v is not unit");
  scale(v, 1.0 / n);
  k.vectors[x_index] = std::move(v);

  const Matrix check = compress(t_mat, k);
  const double scale_t = 1.0 + opnorm(t_mat);
  if (max_abs(check - c) > tol_pinch * scale_t)
    fail(ErrorKind::Internal, "glue_block: pinch identity fails after gluing");
  return k;
}

Frame uniform_pinch_banded(const Operator& t, const Vec& diag_values, int window,
                           uint64_t seed) {
  if (!t.banded())
    fail(ErrorKind::Input, "uniform_pinch_banded: operator is not banded");
  if (window < 2) fail(ErrorKind::Input, "uniform_pinch_banded: window too small");
  const int stride = window + t.bandwidth + 1;
  Frame f;
  f.dim = t.dim;
  for (size_t k = 0; k < diag_values.size(); ++k) {
    const int lo = static_cast<int>(k) * stride;
    if (lo + window > t.dim)
      fail(ErrorKind::NotAttained,
           "uniform_pinch_banded: windows exhausted at target " + std::to_string(k + 1));
    std::vector<int> idx;
    for (int i = lo; i < lo + window; ++i) idx.push_back(i);
    LocalProblem lp = make_local_problem(t, idx, 1);
    f.vectors.push_back(
        subspan_attain(t, lp, Vec{diag_values[k]}, {}, 1e-10, seed + k));
  }
  return f;
}

Matrix egervary_dilation(const Matrix& c, int n) {
  if (!c.square() || c.rows < 1) fail(ErrorKind::Input, "egervary_dilation: bad block");
  if (n < 1) fail(ErrorKind::Input, "egervary_dilation: n must be >= 1");
  if (opnorm(c) > 1.0 + 1e-12)
    fail(ErrorKind::Input, "egervary_dilation: ||C|| <= 1 required");
  const int r = c.rows;
  Matrix id = Matrix::identity(r);
  Matrix dc = psd_sqrt(id - matmul('C', c, 'N', c));    // (I - C*C)^{1/2}
  Matrix dcs = psd_sqrt(id - matmul('N', c, 'C', c));   // (I - CC*)^{1/2}

  const int m = (n + 1) * r;
  Matrix u(m, m);
  auto put = [&](int bi, int bj, const Matrix& blk, bool neg_adj) {
    for (int j = 0; j < r; ++j)
      for (int i = 0; i < r; ++i)
        u(bi * r + i, bj * r + j) =
            neg_adj ? -std::conj(blk(j, i)) : blk(i, j);
  };
  put(0, 0, c, false);
  put(0, n, dcs, false);
  put(1, 0, dc, false);
  put(1, n, c, true);  // -C^*
  for (int k = 2; k <= n; ++k) put(k, k - 1, id, false);

  Matrix gram = matmul('C', u, 'N', u);
  if (max_abs(gram - Matrix::identity(m)) > 1e-12 * m)
    fail(ErrorKind::Internal, "egervary_dilation: dilation is not unitary");
  return u;
}

JointDiag joint_diagonalize(const std::vector<Matrix>& family, double tol) {
  JointDiag jd;
  if (family.empty()) return jd;
  const int r = family[0].rows;
  double scale_ = 1e-300;
  for (const auto& f : family) scale_ = std::max(scale_, max_abs(f));

  std::vector<Matrix> herms;
  for (const auto& f : family) {
    Matrix re(r, r), im(r, r);
    for (int j = 0; j < r; ++j)
      for (int i = 0; i < r; ++i) {
        re(i, j) = 0.5 * (f(i, j) + std::conj(f(j, i)));
        im(i, j) = cd(0.0, -0.5) * (f(i, j) - std::conj(f(j, i)));
      }
    herms.push_back(std::move(re));
    herms.push_back(std::move(im));
  }

  Matrix q = Matrix::identity(r);
  std::vector<std::pair<int, int>> clusters{{0, r}};
  for (const auto& h : herms) {
    std::vector<std::pair<int, int>> next;
    for (auto [lo, hi] : clusters) {
      const int sz = hi - lo;
      if (sz == 1) {
        next.push_back({lo, hi});
        continue;
      }
      // compress h onto the cluster columns of q and rotate
      Matrix qc(r, sz);
      for (int j = 0; j < sz; ++j)
        for (int i = 0; i < r; ++i) qc(i, j) = q(i, lo + j);
      Matrix hc = hermitian_average(matmul('C', qc, 'N', matmul(h, qc)));
      EigResult e = heig(hc);
      Matrix rot = matmul(qc, e.vectors);
      for (int j = 0; j < sz; ++j)
        for (int i = 0; i < r; ++i) q(i, lo + j) = rot(i, j);
      int start = 0;
      for (int j = 1; j <= sz; ++j) {
        if (j == sz || e.values[j] - e.values[start] > 1e-9 * std::max(1.0, scale_)) {
          next.push_back({lo + start, lo + j});
          start = j;
        }
      }
    }
    clusters = std::move(next);
  }

  jd.q = q;
  for (const auto& f : family) {
    Matrix d = matmul('C', q, 'N', matmul(f, q));
    Vec vals(r);
    double off = 0.0;
    for (int j = 0; j < r; ++j) {
      vals[j] = d(j, j);
      for (int i = 0; i < r; ++i)
        if (i != j) off = std::max(off, std::abs(d(i, j)));
    }
    if (off > tol * std::max(1.0, scale_)) return jd;  // ok stays false
    jd.values.push_back(std::move(vals));
  }
  jd.ok = true;
  return jd;
}

namespace {

struct PinchEngine {
  const Operator& t;
  int npow;
  double norm_t;
  double tol_pinch;
  uint64_t seed;

  // pick a fresh gluing direction when y_m is already spanned
  Vec fresh_direction(const std::vector<Vec>& kspan) const {
    for (int i = 0; i < t.dim; ++i) {
      Vec e(t.dim, cd(0.0));
      e[i] = 1.0;
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& k : kspan) axpy(e, -inner(e, k), k);
      const double n = norm2(e);
      if (n > 0.5) {
        scale(e, 1.0 / n);
        return e;
      }
    }
    fail(ErrorKind::NotAttained, "pinching: no direction left for the gluing step");
  }
};

double ln_floor2(double d2) { return std::log(std::max(d2, 1e-300)); }

PinchingPlan run_pinch(const Operator& t, const std::vector<Matrix>& blocks,
                       int npow, bool power_constants, const DenseSequence& dense,
                       const PinchOptions& opts,
                       std::vector<ConvexCombinationLedger>* ledgers) {
  if (!t.banded())
    fail(ErrorKind::Input, "pinching: separated-support construction needs a banded operator");
  const int K = static_cast<int>(blocks.size());
  if (K < 1) fail(ErrorKind::Input, "pinching: no blocks");
  if (opts.m_groups < 1 || opts.m_groups > static_cast<int>(dense.vectors.size()))
    fail(ErrorKind::Input, "pinching: m_groups exceeds the dense sequence");

  int r_max = 1;
  std::vector<double> cnorms(K);
  for (int k = 0; k < K; ++k) {
    if (!blocks[k].square() || blocks[k].rows < 1)
      fail(ErrorKind::Input, "pinching: block " + std::to_string(k + 1) + " is not square");
    cnorms[k] = opnorm(blocks[k]);
    if (cnorms[k] >= 1.0)
      fail(ErrorKind::Input,
           "pinching: block " + std::to_string(k + 1) + " must be a strict contraction");
    r_max = std::max(r_max, blocks[k].rows);
  }

  const double norm_t = opnorm(t.mat);
  double maxc = 0.0;
  for (double c : cnorms) maxc = std::max(maxc, c);

  // ledger weights and rho per block
  std::vector<double> weights(K), rhos(K);
  for (int k = 0; k < K; ++k) {
    const double num = std::pow(1.0 - cnorms[k], npow);
    const double den = power_constants
                           ? npow * std::pow(2.0, 2 * npow + 7) * std::pow(norm_t, npow)
                           : 16.0 * norm_t;
    weights[k] = num / den;
    rhos[k] = std::sqrt(weights[k]);
    if (rhos[k] > 0.25 + 1e-12)
      fail(ErrorKind::Input,
           "pinching: ||T|| too small for the correction hypothesis (rho > 1/4)");
  }

  // window planning: capacity per block sub-pool must cover the avoid set
  const int need_subpool = (2 * npow + 1) + (K - 1) + 6;
  const double radius_need = std::min(0.995, (1.0 + maxc) / 2.0 + 0.05);
  int w = opts.window;
  if (w <= 0) {
    w = 6;
    while (w < t.dim && std::cos(M_PI / (w + 1)) < radius_need) ++w;
    w = std::max(w, 8);
  }
  const int stride = w + npow * std::max(1, t.bandwidth) + 1;
  int per_group = std::max(r_max, (r_max * need_subpool * 13) / (10 * w) + 1);
  while (per_group > r_max && K * per_group * stride > t.dim) --per_group;
  if (K * per_group * stride > t.dim)
    fail(ErrorKind::NotAttained,
         "pinching: truncation too small for " + std::to_string(K) + " blocks");

  SplitOptions sopts;
  sopts.circle_targets = per_group;
  sopts.accuracy_levels = 1;
  sopts.powers = npow;
  sopts.window = w;
  sopts.seed = opts.seed;
  std::vector<SplitGroup> groups = split_subspaces(t, K, sopts);

  PinchingPlan plan;
  plan.n = npow;
  plan.op_norm = norm_t;
  plan.tol_pinch = opts.tol_pinch;
  plan.groups = partition_indices(weights, opts.m_groups);
  std::vector<int> group_of(K + 1, 0);
  for (size_t m = 0; m < plan.groups.size(); ++m)
    for (int k : plan.groups[m]) group_of[k] = static_cast<int>(m);

  std::vector<Vec> y_resid;
  for (int m = 0; m < opts.m_groups; ++m) {
    Vec y = dense.vectors[m];
    const double n = norm2(y);
    if (std::abs(n - 1.0) > 1e-8)
      fail(ErrorKind::Input, "pinching: dense sequence vectors must be unit norm");
    scale(y, 1.0 / n);
    y_resid.push_back(std::move(y));
  }

  PinchEngine eng{t, npow, norm_t, opts.tol_pinch, opts.seed};
  std::vector<Vec> kspan;  // all accepted K vectors
  std::vector<double> running(opts.m_groups, 0.0);
  const double tol_scaled = opts.tol_pinch * (1.0 + norm_t);

  for (int N = 1; N <= K; ++N) {
    const Matrix& c = blocks[N - 1];
    const int r = c.rows;
    const int m = group_of[N];
    const double rho = rhos[N - 1];

    PinchBlock blk;
    blk.c = c;
    blk.c_norm = cnorms[N - 1];
    blk.rho = rho;
    blk.group = m;
    blk.weight = weights[N - 1];

    // gluing direction from the dense-sequence residual
    Vec b;
    const double tdist = norm2(y_resid[m]);
    if (tdist <= 1e-12) {
      b = eng.fresh_direction(kspan);
    } else {
      b = y_resid[m];
      scale(b, 1.0 / tdist);
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& k : kspan) axpy(b, -inner(b, k), k);
      const double bn = norm2(b);
      if (bn < 0.5) {
        b = eng.fresh_direction(kspan);
      } else {
        scale(b, 1.0 / bn);
      }
    }

    // tau_j = <T^j b, b> and the per-power corrections
    blk.taus.resize(npow);
    std::vector<Vec> tpow_b(npow);
    {
      Vec tb = b;
      for (int j = 0; j < npow; ++j) {
        tb = banded_apply(t, tb);
        tpow_b[j] = tb;
        blk.taus[j] = inner(tb, b);
      }
    }
    Matrix cpow = c;
    for (int j = 0; j < npow; ++j) {
      if (j > 0) cpow = matmul(cpow, c);
      Matrix cj = bourin_correction(cpow, rho, blk.taus[j], r - 1);
      blk.power_deviation.push_back(opnorm(cj - cpow));
      blk.deviation_bound.push_back(8.0 * rho * rho * std::pow(norm_t, j + 1));
      if (blk.power_deviation.back() > blk.deviation_bound.back() + 1e-12)
        fail(ErrorKind::Internal, "pinching: correction deviates beyond its bound");
      blk.cprimes.push_back(std::move(cj));
    }
    blk.cprime_norm = opnorm(blk.cprimes[0]);
    blk.cprime_norm_bound = blk.c_norm + 0.5 * (1.0 - blk.c_norm);
    if (blk.cprime_norm > blk.cprime_norm_bound + 1e-12)
      fail(ErrorKind::Internal, "pinching: ||C'|| escapes the norm chain");

    if (ledgers) {
      std::vector<Matrix> devs;
      Matrix cp = c;
      for (int j = 0; j < npow; ++j) {
        if (j > 0) cp = matmul(cp, c);
        devs.push_back(blk.cprimes[j] - cp);
      }
      ledgers->push_back(l32_ledger(c, devs, npow, 1.0));
    }

    const auto& windows = groups[N - 1].windows;
    std::vector<Vec> avoid = kspan;
    avoid.push_back(b);
    for (int j = 0; j < npow; ++j) {
      avoid.push_back(tpow_b[j]);
      Vec tsb = b;
      for (int p = 0; p <= j; ++p) tsb = adjoint_matvec(t.mat, tsb);
      avoid.push_back(std::move(tsb));
    }

    // jointly diagonalize the corrections (scalar blocks are trivial); a
    // caller-supplied witness may realize families this path cannot
    Frame kprime;
    kprime.dim = t.dim;
    JointDiag jd = joint_diagonalize(blk.cprimes, 1e-10);
    if (jd.ok) {
      // realize each joint eigenvalue tuple in its own sub-pool of windows
      const size_t per = windows.size() / r;
      if (per < 1)
        fail(ErrorKind::NotAttained, "pinching: not enough windows for the block dimension");
      Matrix zcols(t.dim, r);
      for (int i = 0; i < r; ++i) {
        Vec target(npow);
        for (int j = 0; j < npow; ++j) target[j] = jd.values[j][i];
        const size_t first = i * per;
        const size_t count = (i == r - 1) ? windows.size() - first : per;
        std::vector<int> idx = window_run_indices(windows, first, count);
        LocalProblem lp = make_local_problem(t, idx, npow);
        Vec z = subspan_attain(t, lp, target, avoid, std::min(1e-10, opts.tol_pinch * 1e-2),
                               opts.seed + static_cast<uint64_t>(N) * 131 + i);
        for (int row = 0; row < t.dim; ++row) zcols(row, i) = z[row];
        for (int wdx = static_cast<int>(first); wdx < static_cast<int>(first + count); ++wdx)
          blk.windows_used.push_back((N - 1) * static_cast<int>(windows.size()) + wdx);
      }
      // rotate back: U = Z Q^H realizes C'_j = Q D_j Q^H
      Matrix ucols = matmul('N', zcols, 'C', jd.q);
      for (int j = 0; j < r; ++j) {
        Vec col(t.dim);
        for (int i = 0; i < t.dim; ++i) col[i] = ucols(i, j);
        kprime.vectors.push_back(std::move(col));
      }
    } else {
      if (!opts.inner_witness)
        fail(ErrorKind::UnsupportedBlock,
             "pinching: block " + std::to_string(N) +
                 " has a non-normal (or non-commuting) correction family; no inner witness available");
      kprime = opts.inner_witness(N, blk.cprimes, windows, avoid);
      if (kprime.size() != r)
        fail(ErrorKind::UnsupportedBlock,
             "pinching: inner witness declined block " + std::to_string(N));
      kprime.dim = t.dim;
      require_orthonormal(kprime);
      for (const auto& k : kprime.vectors) {
        for (const auto& q : avoid) {
          const double qn = norm2(q);
          if (qn > 0.0 && std::abs(inner(k, q)) > 1e-10 * qn)
            fail(ErrorKind::Geometry, "pinching: inner witness violates the avoid set");
        }
        double outside = 0.0;
        std::vector<bool> inside(t.dim, false);
        for (const auto& w : windows)
          for (int i = w.first; i < w.second; ++i) inside[i] = true;
        for (int i = 0; i < t.dim; ++i)
          if (!inside[i]) outside += std::norm(k[i]);
        if (std::sqrt(outside) > 1e-10)
          fail(ErrorKind::Geometry, "pinching: inner witness leaves the block's window span");
      }
      for (size_t w = 0; w < windows.size(); ++w)
        blk.windows_used.push_back((N - 1) * static_cast<int>(windows.size()) +
                                   static_cast<int>(w));
    }
    for (int j = 0; j < npow; ++j) {
      const Matrix realized = power_compress(t.mat, kprime, j + 1);
      if (max_abs(realized - blk.cprimes[j]) >
          tol_scaled * (1.0 + std::pow(norm_t, j)))
        fail(jd.ok ? ErrorKind::Internal : ErrorKind::Geometry,
             "pinching: realized compression misses the correction at power " +
                 std::to_string(j + 1));
    }

    // glue and verify all covered powers
    Frame kb = kprime;
    Vec v = kprime.vectors[r - 1];
    scale(v, std::sqrt(1.0 - rho * rho));
    axpy(v, rho, b);
    kb.vectors[r - 1] = std::move(v);

    double worst = 0.0;
    Matrix cp2 = c;
    for (int j = 0; j < npow; ++j) {
      if (j > 0) cp2 = matmul(cp2, c);
      const Matrix realized = power_compress(t.mat, kb, j + 1);
      worst = std::max(worst, max_abs(realized - cp2) / (1.0 + std::pow(norm_t, j + 1)));
    }
    blk.pinch_residual = worst;
    if (worst > opts.tol_pinch)
      fail(ErrorKind::Internal,
           "pinching: block identity residual " + std::to_string(worst) + " above tolerance");

    for (const auto& kv : kb.vectors) {
      kspan.push_back(kv);
      for (auto& yr : y_resid) axpy(yr, -inner(yr, kv), kv);
    }
    blk.k_basis = std::move(kb);
    running[m] += blk.weight;
    blk.weight_sum = running[m];
    blk.ln_dist2 = ln_floor2(norm2(y_resid[m]) * norm2(y_resid[m]));
    plan.blocks.push_back(std::move(blk));
  }
  return plan;
}

}  // namespace

PinchingPlan pinch_blaschke(const Operator& t, const std::vector<Matrix>& blocks,
                            const DenseSequence& dense, const PinchOptions& opts) {
  return run_pinch(t, blocks, 1, false, dense, opts, nullptr);
}

PowerPinchResult pinch_power_blaschke(const Operator& t,
                                      const std::vector<Matrix>& blocks, int n,
                                      const DenseSequence& dense,
                                      const PinchOptions& opts) {
  if (n < 1) fail(ErrorKind::Input, "pinch_power_blaschke: n must be >= 1");
  PowerPinchResult out;
  out.plan = run_pinch(t, blocks, n, true, dense, opts, &out.ledgers);
  return out;
}

VerifyReport verify_pinching_plan(const PinchingPlan& plan, const Operator& t,
                                  const DenseSequence& dense) {
  VerifyReport rep;
  const int K = static_cast<int>(plan.blocks.size());
  const double tol_scaled = plan.tol_pinch * (1.0 + plan.op_norm);

  std::vector<const Vec*> all;
  for (int k = 0; k < K; ++k) {
    const PinchBlock& blk = plan.blocks[k];
    for (const auto& v : blk.k_basis.vectors) {
      if (std::abs(norm2(v) - 1.0) > 1e-10) {
        rep.ok = false;
        rep.failing_step = k + 1;
        rep.reason = "k-basis vector is not unit norm";
        return rep;
      }
      for (const Vec* prev : all)
        if (std::abs(inner(v, *prev)) > 1e-10) {
          rep.ok = false;
          rep.failing_step = k + 1;
          rep.reason = "subspaces are not mutually orthogonal";
          return rep;
        }
    }
    for (const auto& v : blk.k_basis.vectors) all.push_back(&v);

    Matrix cp = blk.c;
    for (int j = 1; j <= plan.n; ++j) {
      if (j > 1) cp = matmul(cp, blk.c);
      const Matrix realized = power_compress(t.mat, blk.k_basis, j);
      if (max_abs(realized - cp) > tol_scaled * (1.0 + std::pow(plan.op_norm, j - 1))) {
        rep.ok = false;
        rep.failing_step = k + 1;
        rep.reason = "block compression misses C^" + std::to_string(j);
        return rep;
      }
    }
    if (blk.cprime_norm > blk.cprime_norm_bound + 1e-12 || blk.cprime_norm_bound >= 1.0) {
      rep.ok = false;
      rep.failing_step = k + 1;
      rep.reason = "||C'|| norm chain violated";
      return rep;
    }
  }

  // ledger inequality for every dense vector with a group
  for (size_t m = 0; m < plan.groups.size() && m < dense.vectors.size(); ++m) {
    Vec r = dense.vectors[m];
    std::vector<bool> mine(K + 1, false);
    for (int k : plan.groups[m])
      if (k <= K) mine[k] = true;
    double wsum = 0.0;
    for (int N = 1; N <= K; ++N) {
      for (const auto& v : plan.blocks[N - 1].k_basis.vectors)
        axpy(r, -inner(r, v), v);
      if (mine[N]) wsum += plan.blocks[N - 1].weight;
      const double lhs = std::log(std::max(norm2(r) * norm2(r), 1e-300));
      if (lhs > -wsum + plan.slack) {
        rep.ok = false;
        rep.failing_step = N;
        rep.reason = "pinching distance ledger fails for group " + std::to_string(m);
        return rep;
      }
    }
  }
  return rep;
}

ConvexCombinationLedger l32_ledger(const Matrix& c, const std::vector<Matrix>& a,
                                   int n, double rho_declared) {
  if (!c.square() || c.rows < 1) fail(ErrorKind::Input, "l32_ledger: bad block");
  if (static_cast<int>(a.size()) != n)
    fail(ErrorKind::Input, "l32_ledger: need exactly n perturbations");
  const int r = c.rows;
  for (const auto& m : a)
    if (m.rows != r || m.cols != r)
      fail(ErrorKind::Input, "l32_ledger: perturbation shape mismatch");

  ConvexCombinationLedger led;
  led.n = n;
  led.c = opnorm(c);
  if (led.c >= 1.0) fail(ErrorKind::Input, "l32_ledger: ||C|| < 1 required");
  led.d = std::pow(1.0 - led.c, n) / (n * std::pow(2.0, 2 * n + 4));
  for (int j = 0; j < n; ++j)
    if (opnorm(a[j]) > led.d + 1e-14)
      fail(ErrorKind::Input,
           "l32_ledger: ||A_" + std::to_string(j + 1) +
               "|| violates the hypothesis bound (1-||C||)^n / (n 2^(2n+4))");
  led.c_prime = led.c + led.c * std::pow(1.0 - led.c, n) / std::pow(2.0, n + 1);
  led.d_prime = 1.0 / std::pow(2.0, n + 1);
  const double c_ratio = led.c > 0.0 ? led.c / led.c_prime : 0.0;
  led.margin = 1.0 - c_ratio - 2.0 * n * led.d / led.d_prime;
  if (!(led.margin > 0.0))
    fail(ErrorKind::Internal, "l32_ledger: the convex margin closed under the hypothesis");
  led.eps_prime = led.margin / (4.0 * n);
  led.eps = led.eps_prime / (2.0 * n * std::pow(2.0, n));

  const int m = (n + 1) * r;
  Matrix cu(m, m);
  if (led.c > 0.0) {
    Matrix contraction = (cd(1.0 / led.c, 0.0)) * c;
    led.dilation = egervary_dilation(contraction, n);
    cu = cd(led.c, 0.0) * led.dilation;
  } else {
    led.dilation = Matrix::identity(m);
    // cU = 0
  }

  // extensions A~_j = A_j on L, 0 on the rest
  std::vector<Matrix> ext(n, Matrix(m, m));
  for (int j = 0; j < n; ++j)
    for (int col = 0; col < r; ++col)
      for (int row = 0; row < r; ++row) ext[j](row, col) = a[j](row, col);

  // powers of cU and the (here exactly zero) Weyl-von Neumann residues
  std::vector<Matrix> cu_pow;
  {
    Matrix p = cu;
    cu_pow.push_back(p);
    for (int j = 2; j <= n; ++j) {
      p = matmul(p, cu);
      cu_pow.push_back(p);
    }
  }
  // D = cU in its own eigenbasis; diagonal entries have moduli c.
  // K_j = (cU)^j - D^j is floating-point small, kept as the compact residue.
  JointDiag ud = joint_diagonalize({cu}, 1e-10);
  if (!ud.ok) fail(ErrorKind::Internal, "l32_ledger: cU failed to diagonalize");
  std::vector<Matrix> d_pow(n), k_resid(n);
  for (int j = 0; j < n; ++j) {
    Matrix dj(m, m);
    for (int i = 0; i < m; ++i) dj(i, i) = std::pow(ud.values[0][i], j + 1);
    d_pow[j] = matmul(matmul(ud.q, dj), adjoint(ud.q));
    k_resid[j] = cu_pow[j] - d_pow[j];
  }

  const double rho_eff = std::min(1.0, rho_declared);
  const double winf_threshold = std::pow(rho_eff, n) / std::pow(2.0, n);

  auto push_summand = [&](const std::string& label, double weight,
                          std::vector<Matrix> tup, double entry_bound,
                          double threshold, bool member) {
    LedgerSummand s;
    s.label = label;
    s.weight = weight;
    s.tuple = std::move(tup);
    s.entry_bound = entry_bound;
    s.threshold = threshold;
    s.membership = member;
    led.summands.push_back(std::move(s));
  };

  // scaled powers of D: membership by proximity to the power curve
  if (led.c > 0.0) {
    std::vector<Matrix> tup;
    for (int j = 0; j < n; ++j) tup.push_back(cd(led.c_prime / led.c, 0.0) * d_pow[j]);
    const double drift = led.c_prime - led.c;  // distance to the curve point
    const double curve_margin = hull_distance_lower_bound(cd(led.c, 0.0), 1.0 - led.c, n);
    push_summand("curve-powers-of-D", c_ratio, std::move(tup), drift, curve_margin,
                 drift < curve_margin);
  }

  // Hermitian halves of the extensions, scaled to d'
  for (int j = 0; j < n; ++j) {
    Matrix re(m, m), im_i(m, m);  // Re A~_j and i Im A~_j
    for (int col = 0; col < m; ++col)
      for (int row = 0; row < m; ++row) {
        const cd v = ext[j](row, col), w = std::conj(ext[j](col, row));
        re(row, col) = 0.5 * (v + w);
        im_i(row, col) = 0.5 * (v - w);
      }
    const double sc = led.d_prime / led.d;
    for (int half = 0; half < 2; ++half) {
      std::vector<Matrix> tup(n, Matrix(m, m));
      tup[j] = cd(sc, 0.0) * (half == 0 ? re : im_i);
      const double bound = opnorm(half == 0 ? re : im_i) * sc;
      push_summand((half == 0 ? "re-part-" : "im-part-") + std::to_string(j + 1),
                   led.d / led.d_prime, std::move(tup), bound, winf_threshold,
                   bound < winf_threshold);
    }
  }

  // compact residues: exact diagonalization leaves them floating-point zero,
  // kept so the ledger reconstructs the proof's shape
  for (int j = 0; j < n; ++j) {
    Matrix re(m, m), im_i(m, m);  // Re K_j and i Im K_j
    for (int col = 0; col < m; ++col)
      for (int row = 0; row < m; ++row) {
        const cd v = k_resid[j](row, col), w = std::conj(k_resid[j](col, row));
        re(row, col) = 0.5 * (v + w);
        im_i(row, col) = 0.5 * (v - w);
      }
    int half = 0;
    for (const char* label : {"reK-", "imK-", "residA-re-", "residA-im-"}) {
      std::vector<Matrix> tup(n, Matrix(m, m));
      double bound = 0.0;
      if (half == 0) {
        tup[j] = cd(1.0 / led.eps_prime, 0.0) * re;
        bound = opnorm(re) / led.eps_prime;
      } else if (half == 1) {
        tup[j] = cd(1.0 / led.eps_prime, 0.0) * im_i;
        bound = opnorm(im_i) / led.eps_prime;
      }
      push_summand(label + std::to_string(j + 1), led.eps_prime, std::move(tup),
                   bound, winf_threshold,
                   std::max(bound, led.eps / led.eps_prime) < winf_threshold);
      ++half;
    }
  }

  // reconstruction: weighted summands must reassemble the tuple exactly
  std::vector<Matrix> target(n);
  for (int j = 0; j < n; ++j) target[j] = cu_pow[j] + ext[j];
  led.weight_total = 0.0;
  std::vector<Matrix> acc(n, Matrix(m, m));
  for (const auto& s : led.summands) {
    led.weight_total += s.weight;
    for (int j = 0; j < n; ++j)
      for (size_t i = 0; i < acc[j].a.size(); ++i)
        acc[j].a[i] += s.weight * s.tuple[j].a[i];
  }
  double recon = 0.0;
  for (int j = 0; j < n; ++j) recon = std::max(recon, max_abs(acc[j] - target[j]));
  led.reconstruction_residual = recon;
  if (recon > 1e-10 * std::max(1.0, led.c))
    fail(ErrorKind::Internal, "l32_ledger: reconstruction drifted");
  return led;
}

}  // namespace bforge
