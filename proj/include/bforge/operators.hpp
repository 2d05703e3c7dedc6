#pragma once

#include <optional>
#include <string>

#include "bforge/complexmat.hpp"

namespace bforge {

enum class OpKind { Dense, Shift, WeightedShift, Jordan, Diagonal };

// A truncation of a Hilbert-space operator. `bandwidth` is metadata consumed
// by the separated-support constructions in the pinching module; -1 means no
// band structure (full).
struct Operator {
  OpKind kind = OpKind::Dense;
  int dim = 0;
  int bandwidth = -1;
  Matrix mat;

  bool banded() const { return bandwidth >= 0 && bandwidth < dim - 1; }
};

struct OperatorSpec {
  OpKind kind = OpKind::Dense;
  int dim = 0;
  std::vector<Vec> rows;    // dense entries, row-major as parsed
  Vec diagonal_entries;     // diagonal kind
  Vec weights;              // weighted shift
  cd lambda = 0.0;          // jordan eigenvalue
};

Operator load_operator(const OperatorSpec& spec);
Operator make_shift(int dim);
Operator make_weighted_shift(const Vec& weights);
Operator make_jordan(int dim, cd lambda);
Operator make_diagonal(const Vec& entries);
Operator make_dense(const Matrix& m);

struct OperatorTuple {
  int n = 0;
  int dim = 0;
  std::vector<Matrix> parts;
};

struct SelfAdjointTuple {
  int s = 0;
  int dim = 0;
  std::vector<Matrix> parts;
};

OperatorTuple single(const Operator& op);
OperatorTuple single(const Matrix& m);
// (T, T^2, ..., T^n)
OperatorTuple power_tuple(const Operator& op, int n);

// The (2n)-tuple ((T_j+T_j^*)/2, (T_j-T_j^*)/(2i)).
SelfAdjointTuple hermitian_parts(const OperatorTuple& t);
SelfAdjointTuple make_selfadjoint_tuple(const std::vector<Matrix>& parts,
                                        double herm_tol = 1e-12);

// max_j of operator norms; the constant in every decay ledger.
double max_part_norm(const SelfAdjointTuple& s);
double max_part_norm(const OperatorTuple& t);

// <S x, x> as a point of R^s.
std::vector<double> tuple_value(const SelfAdjointTuple& s, const Vec& x);
// <T x, x> as a point of C^n.
Vec tuple_value(const OperatorTuple& t, const Vec& x);

// Ordered orthonormal list; the partial basis (u_k) of the constructions.
struct Frame {
  int dim = 0;
  double tol_ortho = 1e-10;
  std::vector<Vec> vectors;

  int size() const { return static_cast<int>(vectors.size()); }
};

struct FrameAudit {
  double max_gram_offdiag = 0.0;
  double max_norm_deviation = 0.0;
};

FrameAudit audit_frame(const Frame& f);
void require_orthonormal(const Frame& f);  // FrameError on violation

Frame standard_frame(int dim, const std::vector<int>& indices);

// P_L T |_L in the given orthonormal basis: entries <T u_b, u_a>.
Matrix compress(const Matrix& t, const Frame& basis);
OperatorTuple compress(const OperatorTuple& t, const Frame& basis);
SelfAdjointTuple compress(const SelfAdjointTuple& s, const Frame& basis);

// Spanning sequence (y_m); at finite dimension a basis suffices.
struct DenseSequence {
  std::vector<Vec> vectors;
};

DenseSequence standard_dense_sequence(int dim);
void require_spanning(const DenseSequence& d, int dim);

}  // namespace bforge
