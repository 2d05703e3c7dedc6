#pragma once

#include "bforge/region.hpp"

namespace bforge {

struct SupportPoint {
  double value = 0.0;  // max spectrum(sum u_j S_j)
  Vec witness;         // associated unit eigenvector
};

// Extreme point of the joint range in direction u (extreme eigenpair of the
// direction combination). Ties are broken by the eigensolver's deterministic
// ordering, lowest index first.
SupportPoint support_point(const SelfAdjointTuple& s, const std::vector<double>& u);

struct BoundarySample {
  double theta = 0.0;
  double value = 0.0;  // support value in direction theta
  cd vertex;           // <T x, x> at the witness
  Vec witness;
};

// Inner polygonal approximation of W(T) by the rotation method; every vertex
// is attained by its stored witness.
std::vector<BoundarySample> numrange_boundary(const Operator& op, int samples = 720);

// Smallest affine subspace containing W(S), found from the null space of the
// Gram matrix of {I, S_1, ..., S_s} under the trace inner product: a
// selfadjoint V has W(V) = {0} iff V = 0.
AffineHull affine_hull(const SelfAdjointTuple& s);

// Validates that the declared region, eroded by `margin`, sits inside the
// sampled numerical range of the truncation, and returns the region tagged
// with the margin. W_e of a finite truncation is empty as defined, so the
// declared region is the model object all builders consume.
ConvexRegion we_model(const ConvexRegion& declared, const Operator& op,
                      double margin, int samples = 720);

}  // namespace bforge
