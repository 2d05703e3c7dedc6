#pragma once

#include <functional>

#include "bforge/builder.hpp"
#include "bforge/moment.hpp"

namespace bforge {

// One mutually-orthogonal slot produced by the subspace splitting: a pool of
// separated index windows plus audited witnesses whose diagonal values track
// prescribed circle targets.
struct SplitGroup {
  std::vector<std::pair<int, int>> windows;  // [begin, end) index ranges
  Frame witnesses;
  std::vector<Vec> witness_values;   // (<T^j x, x>)_{j=1..powers} per witness
  std::vector<cd> witness_targets;   // circle point the witness aims at
  std::vector<double> accuracies;    // required |<Tx,x> - w_s| bound (1/j)
};

struct SplitOptions {
  int circle_targets = 8;   // distinct circle points per group
  int accuracy_levels = 1;  // witnesses per point at accuracies 1/1 .. 1/j_max
  int powers = 1;           // window separation covers T^1 .. T^powers
  int window = 0;           // 0: auto-sized from the accuracy demand
  double shrink = 1e-3;     // relative pullback from the window radius
  uint64_t seed = 0;
};

// Separated-support image of the bijection construction: every witness lives
// in its own window, so witnesses are exactly orthogonal across and within
// groups and cross compressions vanish identically.
std::vector<SplitGroup> split_subspaces(const Operator& T, int m,
                                        const SplitOptions& opts = {});

// The correction making room for the gluing direction:
// C' = (I-P)C(I-P) + (1-rho^2)^{-1/2}[(I-P)CP + PC(I-P)]
//      + (PCP - rho^2 tau P) / (1-rho^2),
// P the rank-one projection onto basis vector x_index. With rho from the
// recursion the norm chain ||C'|| <= ||C|| + (1-||C||)/2 < 1 holds.
Matrix bourin_correction(const Matrix& c, double rho, cd tau, int x_index);

// v-gluing: replaces the x_index column of the realized C'-frame by
// v = sqrt(1-rho^2) u_x + rho b and checks the sesquilinear identity
// <T V z, V w> = <C z, w> on all basis pairs.
Frame glue_block(const Matrix& t_mat, const Matrix& c, const Frame& kprime,
                 const Vec& b, double rho, int x_index, double tol_pinch);

// Diagonal-tuple compression of a banded operator on separated windows: the
// off-diagonal entries of the compression vanish exactly by support
// separation, the diagonal is attained per window.
Frame uniform_pinch_banded(const Operator& t, const Vec& diag_values, int window,
                           uint64_t seed = 0);

struct PinchBlock {
  Matrix c;
  double c_norm = 0.0;
  double rho = 0.0;
  Vec taus;                   // <T^j b, b>, j = 1..n
  std::vector<Matrix> cprimes;
  double cprime_norm = 0.0;
  double cprime_norm_bound = 0.0;      // ||C|| + (1 - ||C||)/2
  std::vector<double> power_deviation; // ||C'_j - C^j||
  std::vector<double> deviation_bound; // 8 rho^2 ||T||^j
  Frame k_basis;                       // V columns; x_index is the last one
  double pinch_residual = 0.0;
  int group = 0;                       // y-partition group
  double weight = 0.0;                 // ledger decay constant of this block
  double weight_sum = 0.0;
  double ln_dist2 = 0.0;
  std::vector<int> windows_used;
};

struct PinchingPlan {
  int n = 1;
  double op_norm = 0.0;
  double tol_pinch = 1e-8;
  double slack = 1e-6;
  std::vector<std::vector<int>> groups;  // y-partition A_m over block indices
  std::vector<PinchBlock> blocks;
};

// Caller-supplied realization for correction families the built-in path
// cannot diagonalize: given the block index, the per-power corrections and
// the block's window pool, return an orthonormal frame K' (inside the window
// span, orthogonal to every avoid vector) whose compressions are the
// corrections. Return an empty frame to decline.
using InnerWitness = std::function<Frame(
    int block_index, const std::vector<Matrix>& corrections,
    const std::vector<std::pair<int, int>>& windows, const std::vector<Vec>& avoid)>;

struct PinchOptions {
  double tol_pinch = 1e-8;
  int m_groups = 1;
  int window = 0;  // 0: auto
  uint64_t seed = 0;
  InnerWitness inner_witness;  // consulted when the corrections are not a
                               // commuting normal family
};

// Blaschke pinching: realizes every contraction C_k as a compression onto
// mutually orthogonal subspaces drawn from the split pools, one gluing
// direction per block, with the log-distance ledger
// ln dist^2{y_m, span K} <= -sum (1-||C_k||) / (16 ||T||).
PinchingPlan pinch_blaschke(const Operator& t, const std::vector<Matrix>& blocks,
                            const DenseSequence& dense,
                            const PinchOptions& opts = {});

// Degree-n block companion power dilation: U unitary on (n+1) copies of the
// block space with P U^k |_L = C^k for 1 <= k <= n.
Matrix egervary_dilation(const Matrix& c, int n);

struct LedgerSummand {
  std::string label;
  double weight = 0.0;
  std::vector<Matrix> tuple;   // scaled n-tuple on the dilation space
  double entry_bound = 0.0;    // max diagonal-entry modulus of the summand
  double threshold = 0.0;      // membership threshold it is compared against
  bool membership = false;
};

struct ConvexCombinationLedger {
  int n = 0;
  double c = 0.0, d = 0.0, c_prime = 0.0, d_prime = 0.0;
  double eps_prime = 0.0, eps = 0.0;
  double margin = 0.0;  // 1 - c/c' - 2n d/d'
  Matrix dilation;      // the unitary U
  std::vector<LedgerSummand> summands;
  double weight_total = 0.0;
  double reconstruction_residual = 0.0;
};

// The constants and convex split ((cU)^j + A~_j) = sum of diagonal-tuple
// summands; diagonal splits are exact at finite dimension, so the compact
// residues are kept as inert zero entries.
ConvexCombinationLedger l32_ledger(const Matrix& c, const std::vector<Matrix>& a,
                                   int n, double rho_declared = 1.0);

// Power-tuple pinching: per block, corrections C'_{N,j} for every power, a
// jointly diagonalizable inner realization, and the n-th power ledger
// constant (1-||C_k||)^n / (n 2^{2n+7} ||T||^n). Attaches the Lemma-style
// constants ledger of every block.
struct PowerPinchResult {
  PinchingPlan plan;
  std::vector<ConvexCombinationLedger> ledgers;
};

PowerPinchResult pinch_power_blaschke(const Operator& t,
                                      const std::vector<Matrix>& blocks, int n,
                                      const DenseSequence& dense,
                                      const PinchOptions& opts = {});

// Compression of T^j onto a frame via repeated matvecs (T^j is never formed).
Matrix power_compress(const Matrix& t_mat, const Frame& basis, int power);

// Standalone plan auditor: recomputes every block compression against C^j,
// the mutual orthogonality of all K vectors, the norm chain and the
// log-distance ledger.
VerifyReport verify_pinching_plan(const PinchingPlan& plan, const Operator& t,
                                  const DenseSequence& dense);

// Joint unitary diagonalization of a commuting normal family; empty result
// signals the family is not simultaneously diagonalizable at tolerance.
struct JointDiag {
  bool ok = false;
  Matrix q;
  std::vector<Vec> values;  // values[j][i]: i-th diagonal entry of family j
};

JointDiag joint_diagonalize(const std::vector<Matrix>& family, double tol);

}  // namespace bforge
