#pragma once

#include <cstdint>
#include <utility>

#include "bforge/complexmat.hpp"

namespace bforge {

struct EigResult {
  std::vector<double> values;  // ascending
  Matrix vectors;              // columns, phase-normalized
};

// Full Hermitian eigendecomposition (LAPACK zheevd). Eigenvector phases are
// fixed so the largest-modulus component is real positive; this keeps every
// downstream construction byte-reproducible.
EigResult heig(const Matrix& h);

// Extreme eigenpair only (LAPACK zheevr with an index range); much cheaper
// than a full decomposition on the boundary-tracing and chord-search paths.
std::pair<double, Vec> heig_extreme(const Matrix& h, bool largest);

// Operator norm. Exact via eigendecomposition of A^*A for small matrices,
// power iteration on A^*A with deterministic restarts for large ones.
double opnorm(const Matrix& m);

// Hermitian PSD square root with negative eigenvalues clamped to zero.
Matrix psd_sqrt(const Matrix& h);

// Modified Gram-Schmidt with two passes; vectors below drop_tol after
// projection are discarded. Returns an orthonormal set.
std::vector<Vec> orthonormalize(const std::vector<Vec>& vs, double drop_tol = 1e-12);

// Orthonormal basis of span(avoid)^perp inside C^dim, built by sweeping the
// standard basis through MGS against the avoid set. Deterministic.
std::vector<Vec> complement_basis(const std::vector<Vec>& avoid, int dim);

// One MGS pass of v against an orthonormal set, then renormalize.
// Returns the norm of the residual before normalization.
double reorthonormalize(Vec& v, const std::vector<Vec>& basis);

// Deterministic xoshiro-free RNG used for all seeded sampling.
class Rng {
public:
  explicit Rng(uint64_t seed) : state_(seed + 0x9e3779b97f4a7c15ull) {}
  uint64_t next();
  double uniform();               // [0, 1)
  double normal();                // Box-Muller, deterministic
  Vec unit_vector(int dim);       // Haar-ish unit vector

private:
  uint64_t state_;
};

}  // namespace bforge
