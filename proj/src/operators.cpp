#include "bforge/operators.hpp"

#include <algorithm>
#include <cmath>

#include "bforge/linalg.hpp"

namespace bforge {

namespace {

int sparsity_bandwidth(const Matrix& m) {
  int bw = 0;
  for (int j = 0; j < m.cols; ++j)
    for (int i = 0; i < m.rows; ++i)
      if (m(i, j) != cd(0.0)) bw = std::max(bw, std::abs(i - j));
  return bw;
}

void require_finite(const Matrix& m) {
  for (const auto& v : m.a)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      fail(ErrorKind::Input, "operator entries must be finite");
}

}  // namespace

Operator make_shift(int dim) {
  if (dim < 1) fail(ErrorKind::Input, "shift: dim must be >= 1");
  Operator op;
  op.kind = OpKind::Shift;
  op.dim = dim;
  op.bandwidth = 1;
  op.mat = Matrix(dim, dim);
  for (int i = 0; i + 1 < dim; ++i) op.mat(i, i + 1) = 1.0;
  return op;
}

Operator make_weighted_shift(const Vec& weights) {
  const int dim = static_cast<int>(weights.size()) + 1;
  Operator op;
  op.kind = OpKind::WeightedShift;
  op.dim = dim;
  op.bandwidth = 1;
  op.mat = Matrix(dim, dim);
  for (int i = 0; i + 1 < dim; ++i) op.mat(i, i + 1) = weights[i];
  require_finite(op.mat);
  return op;
}

Operator make_jordan(int dim, cd lambda) {
  if (dim < 1) fail(ErrorKind::Input, "jordan: dim must be >= 1");
  Operator op;
  op.kind = OpKind::Jordan;
  op.dim = dim;
  op.bandwidth = 1;
  op.mat = Matrix(dim, dim);
  for (int i = 0; i < dim; ++i) op.mat(i, i) = lambda;
  for (int i = 0; i + 1 < dim; ++i) op.mat(i, i + 1) = 1.0;
  require_finite(op.mat);
  return op;
}

Operator make_diagonal(const Vec& entries) {
  const int dim = static_cast<int>(entries.size());
  if (dim < 1) fail(ErrorKind::Input, "diagonal: need at least one entry");
  Operator op;
  op.kind = OpKind::Diagonal;
  op.dim = dim;
  op.bandwidth = 0;
  op.mat = Matrix(dim, dim);
  for (int i = 0; i < dim; ++i) op.mat(i, i) = entries[i];
  require_finite(op.mat);
  return op;
}

Operator make_dense(const Matrix& m) {
  if (!m.square() || m.rows < 1) fail(ErrorKind::Input, "dense: need a square matrix");
  Operator op;
  op.kind = OpKind::Dense;
  op.dim = m.rows;
  op.mat = m;
  require_finite(op.mat);
  op.bandwidth = sparsity_bandwidth(m);
  return op;
}

Operator load_operator(const OperatorSpec& spec) {
  switch (spec.kind) {
    case OpKind::Shift:
      return make_shift(spec.dim);
    case OpKind::WeightedShift: {
      if (spec.dim > 0 && static_cast<int>(spec.weights.size()) != spec.dim - 1)
        fail(ErrorKind::Input, "weighted_shift: need dim-1 weights");
      if (spec.weights.empty()) fail(ErrorKind::Input, "weighted_shift: missing weights");
      return make_weighted_shift(spec.weights);
    }
    case OpKind::Jordan:
      return make_jordan(spec.dim, spec.lambda);
    case OpKind::Diagonal: {
      if (spec.dim > 0 && static_cast<int>(spec.diagonal_entries.size()) != spec.dim)
        fail(ErrorKind::Input, "diagonal: entries length must equal dim");
      return make_diagonal(spec.diagonal_entries);
    }
    case OpKind::Dense: {
      const int n = static_cast<int>(spec.rows.size());
      if (n < 1) fail(ErrorKind::Input, "dense: missing entries");
      if (spec.dim > 0 && spec.dim != n)
        fail(ErrorKind::Input, "dense: dim does not match entries");
      Matrix m(n, n);
      for (int i = 0; i < n; ++i) {
        if (static_cast<int>(spec.rows[i].size()) != n)
          fail(ErrorKind::Input, "dense: entries must be a square array");
        for (int j = 0; j < n; ++j) m(i, j) = spec.rows[i][j];
      }
      return make_dense(m);
    }
  }
  fail(ErrorKind::Input, "unknown operator kind");
}

OperatorTuple single(const Operator& op) { return single(op.mat); }

OperatorTuple single(const Matrix& m) {
  OperatorTuple t;
  t.n = 1;
  t.dim = m.rows;
  t.parts = {m};
  return t;
}

OperatorTuple power_tuple(const Operator& op, int n) {
  if (n < 1) fail(ErrorKind::Input, "power tuple: n must be >= 1");
  OperatorTuple t;
  t.n = n;
  t.dim = op.dim;
  t.parts.reserve(n);
  Matrix p = op.mat;
  t.parts.push_back(p);
  for (int j = 2; j <= n; ++j) {
    p = matmul(p, op.mat);
    t.parts.push_back(p);
  }
  return t;
}

SelfAdjointTuple hermitian_parts(const OperatorTuple& t) {
  SelfAdjointTuple s;
  s.s = 2 * t.n;
  s.dim = t.dim;
  s.parts.reserve(s.s);
  const cd ihalf(0.0, -0.5);
  for (const auto& m : t.parts) {
    Matrix re(m.rows, m.cols), im(m.rows, m.cols);
    for (int j = 0; j < m.cols; ++j)
      for (int i = 0; i < m.rows; ++i) {
        const cd v = m(i, j), w = std::conj(m(j, i));
        re(i, j) = 0.5 * (v + w);
        im(i, j) = ihalf * (v - w);
      }
    s.parts.push_back(std::move(re));
    s.parts.push_back(std::move(im));
  }
  return s;
}

SelfAdjointTuple make_selfadjoint_tuple(const std::vector<Matrix>& parts,
                                        double herm_tol) {
  if (parts.empty()) fail(ErrorKind::Input, "selfadjoint tuple: no parts");
  SelfAdjointTuple s;
  s.s = static_cast<int>(parts.size());
  s.dim = parts[0].rows;
  for (const auto& p : parts) {
    if (!p.square() || p.rows != s.dim)
      fail(ErrorKind::Input, "selfadjoint tuple: parts must share one dimension");
    double scalefro = std::max(1.0, frobenius(p));
    if (hermiticity_defect(p) > herm_tol * scalefro)
      fail(ErrorKind::Input, "selfadjoint tuple: part is not Hermitian");
  }
  s.parts = parts;
  return s;
}

double max_part_norm(const SelfAdjointTuple& s) {
  double m = 0.0;
  for (const auto& p : s.parts) m = std::max(m, opnorm(p));
  return m;
}

double max_part_norm(const OperatorTuple& t) {
  double m = 0.0;
  for (const auto& p : t.parts) m = std::max(m, opnorm(p));
  return m;
}

std::vector<double> tuple_value(const SelfAdjointTuple& s, const Vec& x) {
  std::vector<double> v(s.s);
  for (int j = 0; j < s.s; ++j) v[j] = inner(matvec(s.parts[j], x), x).real();
  return v;
}

Vec tuple_value(const OperatorTuple& t, const Vec& x) {
  Vec v(t.n);
  for (int j = 0; j < t.n; ++j) v[j] = inner(matvec(t.parts[j], x), x);
  return v;
}

FrameAudit audit_frame(const Frame& f) {
  FrameAudit a;
  const int k = f.size();
  for (int i = 0; i < k; ++i) {
    a.max_norm_deviation =
        std::max(a.max_norm_deviation, std::abs(norm2(f.vectors[i]) - 1.0));
    for (int j = 0; j < i; ++j)
      a.max_gram_offdiag =
          std::max(a.max_gram_offdiag, std::abs(inner(f.vectors[i], f.vectors[j])));
  }
  return a;
}

void require_orthonormal(const Frame& f) {
  FrameAudit a = audit_frame(f);
  if (a.max_gram_offdiag > f.tol_ortho || a.max_norm_deviation > f.tol_ortho)
    fail(ErrorKind::Frame, "frame fails orthonormality audit (gram residual " +
                               std::to_string(a.max_gram_offdiag) + ")");
}

Frame standard_frame(int dim, const std::vector<int>& indices) {
  Frame f;
  f.dim = dim;
  for (int idx : indices) {
    if (idx < 0 || idx >= dim) fail(ErrorKind::Input, "standard_frame: index out of range");
    Vec v(dim, cd(0.0));
    v[idx] = 1.0;
    f.vectors.push_back(std::move(v));
  }
  return f;
}

Matrix compress(const Matrix& t, const Frame& basis) {
  require_orthonormal(basis);
  const int k = basis.size();
  Matrix r(k, k);
  for (int b = 0; b < k; ++b) {
    Vec tb = matvec(t, basis.vectors[b]);
    for (int a = 0; a < k; ++a) r(a, b) = inner(tb, basis.vectors[a]);
  }
  return r;
}

OperatorTuple compress(const OperatorTuple& t, const Frame& basis) {
  OperatorTuple r;
  r.n = t.n;
  r.dim = basis.size();
  for (const auto& p : t.parts) r.parts.push_back(compress(p, basis));
  return r;
}

SelfAdjointTuple compress(const SelfAdjointTuple& s, const Frame& basis) {
  SelfAdjointTuple r;
  r.s = s.s;
  r.dim = basis.size();
  for (const auto& p : s.parts)
    r.parts.push_back(hermitian_average(compress(p, basis)));
  return r;
}

DenseSequence standard_dense_sequence(int dim) {
  DenseSequence d;
  d.vectors.reserve(dim);
  for (int i = 0; i < dim; ++i) {
    Vec v(dim, cd(0.0));
    v[i] = 1.0;
    d.vectors.push_back(std::move(v));
  }
  return d;
}

void require_spanning(const DenseSequence& d, int dim) {
  if (static_cast<int>(d.vectors.size()) < dim)
    fail(ErrorKind::Input, "dense sequence: too few vectors to span");
  auto basis = orthonormalize(d.vectors, 1e-10);
  if (static_cast<int>(basis.size()) < dim)
    fail(ErrorKind::Input, "dense sequence: vectors do not span the space");
}

}  // namespace bforge
