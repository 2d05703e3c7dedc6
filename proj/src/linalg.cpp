#include "bforge/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

extern "C" {
void zgemm_(const char* transa, const char* transb, const int* m, const int* n,
            const int* k, const bforge::cd* alpha, const bforge::cd* a,
            const int* lda, const bforge::cd* b, const int* ldb,
            const bforge::cd* beta, bforge::cd* c, const int* ldc);
void zgemv_(const char* trans, const int* m, const int* n,
            const bforge::cd* alpha, const bforge::cd* a, const int* lda,
            const bforge::cd* x, const int* incx, const bforge::cd* beta,
            bforge::cd* y, const int* incy);
}

namespace bforge {

Matrix adjoint(const Matrix& m) {
  Matrix r(m.cols, m.rows);
  for (int j = 0; j < m.cols; ++j)
    for (int i = 0; i < m.rows; ++i) r(j, i) = std::conj(m(i, j));
  return r;
}

Matrix matmul(char opx, const Matrix& x, char opy, const Matrix& y) {
  const int m = (opx == 'N') ? x.rows : x.cols;
  const int k = (opx == 'N') ? x.cols : x.rows;
  const int kb = (opy == 'N') ? y.rows : y.cols;
  const int n = (opy == 'N') ? y.cols : y.rows;
  if (k != kb) fail(ErrorKind::Internal, "matmul shape mismatch");
  Matrix r(m, n);
  if (m == 0 || n == 0 || k == 0) return r;
  const cd one(1.0, 0.0), zero(0.0, 0.0);
  zgemm_(&opx, &opy, &m, &n, &k, &one, x.a.data(), &x.rows, y.a.data(),
         &y.rows, &zero, r.a.data(), &r.rows);
  return r;
}

Matrix matmul(const Matrix& x, const Matrix& y) { return matmul('N', x, 'N', y); }

Vec matvec(const Matrix& m, const Vec& v) {
  if (static_cast<int>(v.size()) != m.cols)
    fail(ErrorKind::Internal, "matvec shape mismatch");
  Vec r(m.rows);
  if (m.rows == 0 || m.cols == 0) return r;
  const cd one(1.0, 0.0), zero(0.0, 0.0);
  const char tr = 'N';
  const int inc = 1;
  zgemv_(&tr, &m.rows, &m.cols, &one, m.a.data(), &m.rows, v.data(), &inc,
         &zero, r.data(), &inc);
  return r;
}

Vec adjoint_matvec(const Matrix& m, const Vec& v) {
  if (static_cast<int>(v.size()) != m.rows)
    fail(ErrorKind::Internal, "adjoint_matvec shape mismatch");
  Vec r(m.cols);
  if (m.rows == 0 || m.cols == 0) return r;
  const cd one(1.0, 0.0), zero(0.0, 0.0);
  const char tr = 'C';
  const int inc = 1;
  zgemv_(&tr, &m.rows, &m.cols, &one, m.a.data(), &m.rows, v.data(), &inc,
         &zero, r.data(), &inc);
  return r;
}

double max_abs(const Matrix& m) {
  double r = 0.0;
  for (const auto& v : m.a) r = std::max(r, std::abs(v));
  return r;
}

double frobenius(const Matrix& m) {
  double s = 0.0;
  for (const auto& v : m.a) s += std::norm(v);
  return std::sqrt(s);
}

double hermiticity_defect(const Matrix& m) {
  if (!m.square()) fail(ErrorKind::Internal, "hermiticity_defect: not square");
  double s = 0.0;
  for (int j = 0; j < m.cols; ++j)
    for (int i = 0; i < m.rows; ++i) s += std::norm(m(i, j) - std::conj(m(j, i)));
  return std::sqrt(s);
}

Matrix hermitian_average(const Matrix& m) {
  Matrix r(m.rows, m.cols);
  for (int j = 0; j < m.cols; ++j)
    for (int i = 0; i < m.rows; ++i)
      r(i, j) = 0.5 * (m(i, j) + std::conj(m(j, i)));
  return r;
}

cd inner(const Vec& x, const Vec& y) {
  if (x.size() != y.size()) fail(ErrorKind::Internal, "inner: size mismatch");
  cd s = 0.0;
  for (size_t i = 0; i < x.size(); ++i) s += x[i] * std::conj(y[i]);
  return s;
}

double norm2(const Vec& x) {
  double s = 0.0;
  for (const auto& v : x) s += std::norm(v);
  return std::sqrt(s);
}

void scale(Vec& x, cd s) {
  for (auto& v : x) v *= s;
}

void axpy(Vec& y, cd alpha, const Vec& x) {
  for (size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

namespace {

void fix_phase(cd* v, int n) {
  int best = 0;
  double bm = 0.0;
  for (int i = 0; i < n; ++i) {
    double m = std::abs(v[i]);
    if (m > bm * (1.0 + 1e-12)) {
      bm = m;
      best = i;
    }
  }
  if (bm == 0.0) return;
  cd phase = std::conj(v[best]) / bm;
  for (int i = 0; i < n; ++i) v[i] *= phase;
}

}  // namespace

EigResult heig(const Matrix& h) {
  if (!h.square()) fail(ErrorKind::Internal, "heig: not square");
  const int n = h.rows;
  EigResult r;
  r.values.resize(n);
  r.vectors = h;
  if (n == 0) return r;
  int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'U', n, r.vectors.a.data(),
                            n, r.values.data());
  if (info != 0) fail(ErrorKind::Internal, "zheevd failed, info=" + std::to_string(info));
  for (int j = 0; j < n; ++j) fix_phase(&r.vectors.a[static_cast<size_t>(j) * n], n);
  return r;
}

std::pair<double, Vec> heig_extreme(const Matrix& h, bool largest) {
  if (!h.square() || h.rows == 0) fail(ErrorKind::Internal, "heig_extreme: bad shape");
  const int n = h.rows;
  Matrix work = h;
  std::vector<double> w(n);
  Vec z(n);
  std::vector<lapack_int> isuppz(2);
  lapack_int found = 0;
  const lapack_int idx = largest ? n : 1;
  int info = LAPACKE_zheevr(LAPACK_COL_MAJOR, 'V', 'I', 'U', n, work.a.data(),
                            n, 0.0, 0.0, idx, idx, 0.0, &found, w.data(),
                            z.data(), n, isuppz.data());
  if (info != 0 || found < 1)
    fail(ErrorKind::Internal, "zheevr failed, info=" + std::to_string(info));
  fix_phase(z.data(), n);
  return {w[0], z};
}

double opnorm(const Matrix& m) {
  if (m.rows == 0 || m.cols == 0) return 0.0;
  const int n = std::min(m.rows, m.cols);
  if (std::max(m.rows, m.cols) <= 384) {
    // Exact: largest eigenvalue of the Gram matrix.
    const bool tall = m.rows >= m.cols;
    Matrix g = tall ? matmul('C', m, 'N', m) : matmul('N', m, 'C', m);
    auto [lam, v] = heig_extreme(g, true);
    (void)v;
    return std::sqrt(std::max(0.0, lam));
  }
  // Power iteration on A^*A with deterministic restarts.
  double best = 0.0;
  for (uint64_t s = 1; s <= 3; ++s) {
    Rng rng(7777 * s);
    Vec x = rng.unit_vector(m.cols);
    double lam = 0.0;
    for (int it = 0; it < 400; ++it) {
      Vec y = adjoint_matvec(m, matvec(m, x));
      double ny = norm2(y);
      if (ny == 0.0) break;
      scale(y, 1.0 / ny);
      double nl = ny;  // Rayleigh quotient of A^*A at previous unit x
      x = std::move(y);
      if (std::abs(nl - lam) <= 1e-14 * std::max(1.0, nl) && it > 8) {
        lam = nl;
        break;
      }
      lam = nl;
    }
    best = std::max(best, lam);
    (void)n;
  }
  return std::sqrt(std::max(0.0, best)) * (1.0 + 1e-13);
}

Matrix psd_sqrt(const Matrix& h) {
  EigResult e = heig(hermitian_average(h));
  const int n = h.rows;
  Matrix d(n, n);
  for (int i = 0; i < n; ++i) d(i, i) = std::sqrt(std::max(0.0, e.values[i]));
  return matmul(matmul(e.vectors, d), adjoint(e.vectors));
}

std::vector<Vec> orthonormalize(const std::vector<Vec>& vs, double drop_tol) {
  std::vector<Vec> basis;
  for (const auto& v0 : vs) {
    Vec v = v0;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) axpy(v, -inner(v, b), b);
    double n = norm2(v);
    if (n > drop_tol) {
      scale(v, 1.0 / n);
      basis.push_back(std::move(v));
    }
  }
  return basis;
}

std::vector<Vec> complement_basis(const std::vector<Vec>& avoid, int dim) {
  if (avoid.empty()) {
    std::vector<Vec> comp(dim, Vec(dim, cd(0.0)));
    for (int i = 0; i < dim; ++i) comp[i][i] = 1.0;
    return comp;
  }
  // column-pivoted QR of the avoid set; the trailing Householder columns are
  // an exactly orthonormal basis of the complement
  const int m = static_cast<int>(avoid.size());
  Matrix a(dim, std::max(dim, m));
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < dim; ++i) a(i, j) = avoid[j][i];
  std::vector<lapack_int> jpvt(std::max(dim, m), 0);
  Vec tau(std::min(dim, std::max(dim, m)));
  int info = LAPACKE_zgeqp3(LAPACK_COL_MAJOR, dim, m, a.a.data(), dim,
                            jpvt.data(), tau.data());
  if (info != 0) fail(ErrorKind::Internal, "zgeqp3 failed");
  double rmax = 0.0;
  for (int j = 0; j < std::min(dim, m); ++j) rmax = std::max(rmax, std::abs(a(j, j)));
  int rank = 0;
  for (int j = 0; j < std::min(dim, m); ++j)
    if (std::abs(a(j, j)) > 1e-10 * std::max(1.0, rmax)) ++rank;
  info = LAPACKE_zungqr(LAPACK_COL_MAJOR, dim, dim, std::min(dim, m), a.a.data(),
                        dim, tau.data());
  if (info != 0) fail(ErrorKind::Internal, "zungqr failed");
  std::vector<Vec> comp;
  comp.reserve(dim - rank);
  for (int j = rank; j < dim; ++j) {
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v[i] = a(i, j);
    comp.push_back(std::move(v));
  }
  return comp;
}

double reorthonormalize(Vec& v, const std::vector<Vec>& basis) {
  for (const auto& b : basis) axpy(v, -inner(v, b), b);
  double n = norm2(v);
  if (n > 0.0) scale(v, 1.0 / n);
  return n;
}

uint64_t Rng::next() {
  // splitmix64
  state_ += 0x9e3779b97f4a7c15ull;
  uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double Rng::uniform() {
  return static_cast<double>(next() >> 11) * (1.0 / 9007199254740992.0);
}

double Rng::normal() {
  double u1 = 0.0;
  while (u1 <= 1e-300) u1 = uniform();
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

Vec Rng::unit_vector(int dim) {
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v[i] = cd(normal(), normal());
  double n = norm2(v);
  if (n == 0.0) {
    v[0] = 1.0;
    return v;
  }
  scale(v, 1.0 / n);
  return v;
}

}  // namespace bforge
