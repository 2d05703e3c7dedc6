#pragma once

#include <cstdint>

#include "bforge/complexmat.hpp"

namespace bforge {

// Nonnegative weights alpha_j at points mu_j on the circle of radius rho
// reproducing the first n moments of a target eps: sum alpha_j mu_j^k = eps_k.
struct MomentDecomposition {
  double rho = 1.0;
  int n = 0;
  Vec points;                   // mu_j, |mu_j| = rho
  std::vector<double> weights;  // alpha_j >= 0
  Vec eps;

  double weight_sum() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
  }
};

// Weight budget b_1 = 1/rho, b_n = 2 b_{n-1} + rho^{-n}. The closed bounds
// (2^n - 1) rho^{-n} for rho <= 1 and 2^n - 1 for rho >= 1 dominate it.
double b_bound(int n, double rho);

// The constructive recursion: solve the first n-1 moments, then cancel the
// n-th defect with n equally spaced points rho e^{2 pi i (phi + j/n)} of
// weight |defect| / (n rho^n) each. A zero defect skips the correction stage.
MomentDecomposition circle_moment_decompose(const Vec& eps, double rho);

// Residuals max_k |sum alpha mu^k - eps_k| recomputed from scratch.
double moment_reconstruction_residual(const MomentDecomposition& d);

// G_lambda(z)_k = sum_{j<=k} C(k,j) z_j lambda^{k-j} + lambda^k; maps the
// power curve of mu to the power curve of lambda + mu. G_{-lambda} inverts it.
Vec apply_G(cd lambda, const Vec& z);
Vec invert_G(cd lambda, const Vec& w);

// Lower bound for the distance of (lambda, ..., lambda^n) to the boundary of
// C_{rho,lambda} = conv{(mu, ..., mu^n) : |mu - lambda| <= rho}:
// rho^n / 2^n at lambda = 0, rho^n / (4^n max{1, |lambda|^n}) otherwise.
// Only stated for rho <= 1; larger rho is rejected.
double hull_distance_lower_bound(cd lambda, double rho, int n);

// max-norm test ||mu|| < 2^{-n} rho^n for membership of a power tuple's
// infinite numerical range; rho is capped at 1, matching the hypothesis.
bool winf_membership_power(const Vec& mu, double rho);

struct HullOracle {
  std::vector<Vec> curve_points;  // (mu, ..., mu^n) on the circle boundary
  std::vector<Vec> hull_samples;  // random convex combinations of the above
};

// Brute-force inner approximation of C_{rho,lambda}; test oracle only.
HullOracle hull_oracle(cd lambda, double rho, int n, int grid, uint64_t seed = 0);

// Constructive membership certificate for a point w near the power curve:
// recenters by G_{-lambda}, decomposes, and reassembles w as a convex
// combination of curve points of C_{rho,lambda} plus (lambda, ..., lambda^n).
struct HullMembership {
  Vec circle_points;            // nu_j with |nu_j - lambda| = rho
  std::vector<double> weights;  // alpha_j
  double base_weight = 0.0;     // weight at (lambda, ..., lambda^n)
  double residual = 0.0;        // max-norm reassembly error
};

HullMembership hull_membership_certificate(const Vec& w, cd lambda, double rho);

}  // namespace bforge
