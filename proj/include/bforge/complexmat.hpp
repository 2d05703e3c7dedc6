#pragma once

#include <complex>
#include <vector>

#include "bforge/error.hpp"

namespace bforge {

using cd = std::complex<double>;
using Vec = std::vector<cd>;

// Dense column-major complex matrix. All operator algebra in the library is
// dense double precision; structure (bandedness) is tracked as metadata on
// Operator, not in the storage.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<cd> a;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c) {}

  cd& operator()(int i, int j) { return a[static_cast<size_t>(j) * rows + i]; }
  const cd& operator()(int i, int j) const {
    return a[static_cast<size_t>(j) * rows + i];
  }

  bool square() const { return rows == cols; }

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
};

Matrix adjoint(const Matrix& m);
Matrix matmul(const Matrix& x, const Matrix& y);
// op(x) * op(y) with 'N', 'C' (conjugate transpose) selectors, BLAS-backed.
Matrix matmul(char opx, const Matrix& x, char opy, const Matrix& y);
Vec matvec(const Matrix& m, const Vec& v);
Vec adjoint_matvec(const Matrix& m, const Vec& v);

inline Matrix operator+(const Matrix& x, const Matrix& y) {
  if (x.rows != y.rows || x.cols != y.cols)
    fail(ErrorKind::Internal, "matrix shape mismatch in +");
  Matrix r = x;
  for (size_t i = 0; i < r.a.size(); ++i) r.a[i] += y.a[i];
  return r;
}

inline Matrix operator-(const Matrix& x, const Matrix& y) {
  if (x.rows != y.rows || x.cols != y.cols)
    fail(ErrorKind::Internal, "matrix shape mismatch in -");
  Matrix r = x;
  for (size_t i = 0; i < r.a.size(); ++i) r.a[i] -= y.a[i];
  return r;
}

inline Matrix operator*(cd s, const Matrix& x) {
  Matrix r = x;
  for (auto& v : r.a) v *= s;
  return r;
}

double max_abs(const Matrix& m);
double frobenius(const Matrix& m);
// Frobenius norm of A - A^*, used by Hermitian-input validation.
double hermiticity_defect(const Matrix& m);
Matrix hermitian_average(const Matrix& m);  // (A + A^*)/2

// <x, y> = sum_i x_i conj(y_i), linear in the first argument.
cd inner(const Vec& x, const Vec& y);
double norm2(const Vec& x);
void scale(Vec& x, cd s);
void axpy(Vec& y, cd alpha, const Vec& x);  // y += alpha x

}  // namespace bforge
