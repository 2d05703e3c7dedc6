#pragma once

#include <map>
#include <string>

#include "bforge/attain.hpp"
#include "bforge/region.hpp"

namespace bforge {

struct TargetSequence {
  std::vector<std::vector<double>> points;  // lambda_k in R^s
  std::vector<double> weights;              // Blaschke weights w_k
};

// Greedy disjoint cover of 1..K: the next index goes to the group with the
// smallest running weight sum; the finite-horizon stand-in for "each group's
// sum diverges". Partial sums stay balanced within one max weight.
std::vector<std::vector<int>> partition_indices(const std::vector<double>& weights,
                                                int m_groups);

struct CertStep {
  int k = 0;             // 1-based step index N
  int group = 0;         // m with N in A_m
  double t = 0.0;        // dist{y_m, M_{N-1}}
  double rho = 0.0;
  double delta = 0.0;
  std::vector<double> mu;
  double residual = 0.0;    // ||<S u_N, u_N> - lambda_N||
  double weight_sum = 0.0;  // sum_{k<=N, k in A_m} w_k
  double ln_dist2 = 0.0;    // ln dist^2{y_m, M_N}, recomputed
  double step_decay = 0.0;  // -delta/(rho+delta), or -c^2 for the approx build
  double c = 0.0;           // approx build mixing coefficient
  bool degenerate = false;  // y_m already inside M_{N-1}
  bool saturated = false;   // soft mode: truncation could not reach alpha_k
};

struct Certificate {
  std::string kind;  // exact | approx | schatten | power
  int dim = 0;
  int s = 0;
  double max_part_norm = 0.0;
  double tol_attain = 0.0;
  double slack = 1e-6;
  std::vector<std::vector<int>> groups;      // A_m as 1-based step indices
  std::vector<double> weights;               // per step
  std::vector<std::vector<double>> targets;  // reduced coordinates
  std::vector<CertStep> steps;
  // complex-build reduction bookkeeping: eliminated coordinates + relations
  std::vector<int> pivots;
  std::vector<std::vector<double>> relations;
  std::map<std::string, std::string> flags;
};

struct BuildOptions {
  int m_groups = 1;
  double tol_attain = -1.0;  // <= 0: 1e-10 for s <= 2, 1e-8 above
  uint64_t seed = 0;
  bool hint_starts = true;   // seed the attain engine with cheap witnesses
  // Schatten route only: when the truncation cannot reach alpha_k, take the
  // nearest attainable value and flag the step instead of failing. The
  // per-step bound is provably infeasible for boundary targets at finite
  // dimension once enough near-extreme steps have accumulated.
  bool soft_alpha = false;
};

struct BuildResult {
  Frame frame;
  Certificate cert;
};

// Theorem-style greedy induction: at every step split y_m = a + t b over the
// accumulated frame, aim the attain engine at the mirror point mu on the far
// side of lambda_N, and mix u_N = sqrt(rho/(rho+delta)) x + sqrt(delta/(rho+delta)) b.
// Weights may be supplied explicitly; otherwise they are distances to the
// complement of `region` (which must then be present).
BuildResult build_exact_diagonal(const SelfAdjointTuple& S,
                                 const ConvexRegion* region,
                                 const TargetSequence& targets,
                                 const DenseSequence& dense, int steps,
                                 const BuildOptions& opts = {});

// Complex-tuple wrapper: converts to the 2n selfadjoint tuple, eliminates
// affine-hull relations coordinate by coordinate (checking every target
// satisfies them), builds in the reduced coordinates, and reports the
// reduction in the certificate.
BuildResult build_exact_diagonal_complex(const OperatorTuple& T,
                                         const ConvexRegion* region,
                                         const std::vector<Vec>& targets,
                                         const std::vector<double>& explicit_weights,
                                         const DenseSequence& dense, int steps,
                                         const BuildOptions& opts = {});

// Approximate diagonals: ||<T u_k, u_k> - lambda_k|| <= |alpha_k| literally,
// via u_N = c b + sqrt(1-c^2) v with c^2 = min{1, |alpha_N| / (4 max||T_j||)}.
BuildResult build_approx_diagonal(const OperatorTuple& T,
                                  const std::vector<Vec>& targets,
                                  const std::vector<double>& alphas,
                                  const ConvexRegion* region,
                                  const DenseSequence& dense, int steps,
                                  const BuildOptions& opts = {});

struct SchattenReport {
  std::vector<Vec> kappas;               // per-step perturbation diagonal
  std::vector<double> kappa_partial;     // running sums of ||kappa||^p
  std::vector<double> bound_partial;     // running sums of (||l-l'|| + 1/k)^p
  std::vector<Vec> projected_targets;    // lambda'_k on the region
};

struct SchattenResult {
  Frame frame;
  Certificate cert;
  SchattenReport report;
};

// Schatten perturbation route: project the targets onto the region, run the
// approximate build with alpha_k = 1/k, and ledger the perturbation sums
// against the dominating bound.
SchattenResult build_schatten_perturbation(const OperatorTuple& T,
                                           const std::vector<Vec>& targets,
                                           double p, const ConvexRegion& region,
                                           const DenseSequence& dense, int steps,
                                           const BuildOptions& opts = {});

// Power diagonals <T^j u_k, u_k> = lambda_k^j: forms (T, ..., T^n), converts
// distances to the declared spectral disc into hull lower bounds, and runs
// the exact complex build on the power curve targets.
BuildResult build_power_diagonal(const Operator& T, const Vec& lambdas, int n,
                                 const ConvexRegion& rho_model,
                                 const DenseSequence& dense, int steps,
                                 const BuildOptions& opts = {});

struct VerifyReport {
  bool ok = true;
  int failing_step = 0;  // 1-based; 0 when ok
  std::string reason;
};

// Standalone auditor: recomputes frame orthonormality, per-step residuals and
// every distance dist{y_m, span prefix} from scratch, then checks the logged
// ledger inequality with the certificate's slack.
VerifyReport verify_certificate(const Certificate& cert, const Frame& frame,
                                const SelfAdjointTuple& S,
                                const DenseSequence& dense);

}  // namespace bforge
