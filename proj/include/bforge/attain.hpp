#pragma once

#include "bforge/operators.hpp"

namespace bforge {

struct AttainOptions {
  // Residual the returned vector must meet; <= 0 picks the default
  // (1e-10 for s <= 2, 1e-8 above).
  double tol = -1.0;
  int max_bisect = 200;
  int multistarts = 50;
  uint64_t seed = 0;
  // Extra starting vectors (ambient coordinates); projected into the
  // complement before use. Lets builders reuse witnesses across steps.
  std::vector<Vec> hint_starts;
};

// Produce a unit vector x, exactly orthogonal to span(avoid), with
// <S x, x> = lambda up to the tolerance. s = 1 mixes the two extreme
// eigenvectors; s = 2 runs the constructive chord interpolation between
// boundary witnesses; s > 2 runs a damped Gauss-Newton on the sphere of the
// complement, multistarted deterministically.
Vec attain_value(const SelfAdjointTuple& s, const std::vector<double>& lambda,
                 const std::vector<Vec>& avoid, const AttainOptions& opts = {});

double default_attain_tol(int s);

}  // namespace bforge
