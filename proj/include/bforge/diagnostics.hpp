#pragma once

#include <string>

#include "bforge/region.hpp"

namespace bforge {

enum class Trend { Diverging, Summable, Inconclusive };

// Finite-horizon trend heuristic on a partial-sum sequence; labeled as such
// everywhere it is reported.
Trend classify_trend(const std::vector<double>& partial_sums);

const char* trend_name(Trend t);

struct BlaschkeReport {
  std::vector<double> partial_sums;  // running sums of w_k^n
  Trend trend = Trend::Inconclusive;
  int exponent = 1;
};

BlaschkeReport blaschke_report(const std::vector<std::vector<double>>& lambdas,
                               const ConvexRegion& region, int exponent = 1);

struct Verdict {
  std::string verdict;  // module-specific labels
  double lhs = 0.0;
  double rhs = 0.0;
  std::vector<std::string> flags;
};

// Positive operators: a summable diagonal-sum trend contradicts interior
// targets, so the sequence is infeasible as a diagonal; otherwise unknown.
Verdict positive_necessary(const Operator& t, const std::vector<double>& lambdas);

// Functional form: V = alpha_0 I + sum alpha_j S_j, a = min W(V); infeasible
// when the shifted sums trend summable.
Verdict functional_necessary(const SelfAdjointTuple& s,
                             const std::vector<std::vector<double>>& lambdas,
                             const std::vector<double>& alphas);

// The shift model: is-diagonal iff sum (1-|lambda_k|) diverges, under the
// user-asserted model assumptions (norm one, W_e the closed disc, not a
// Fredholm operator of index zero).
Verdict shift_characterization(const Vec& lambdas);

// Sequences with a declared eventual tail value.
struct TailSequence {
  Vec values;
  cd tail = 0.0;       // eventual value
  bool has_tail = false;  // when false, the last element is the tail
};

// 2(1 - inf |d_n|) <= sum (1 - |d_n|), evaluated under the tail convention.
bool unitary_diag_condition(const TailSequence& d);

// a = sum_{d_j < 1/2} d_j, b = sum_{d_j >= 1/2} (1 - d_j); admissible when
// a + b diverges or a - b is an integer.
struct KadisonVerdict {
  std::string verdict;  // divergent-admissible | admissible | inadmissible
  double a = 0.0;
  double b = 0.0;
  bool a_infinite = false;
  bool b_infinite = false;
};

KadisonVerdict kadison_condition(const TailSequence& d);

}  // namespace bforge
