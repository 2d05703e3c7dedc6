#include "bforge/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "bforge/linalg.hpp"

namespace bforge {

Trend classify_trend(const std::vector<double>& partial_sums) {
  const size_t n = partial_sums.size();
  if (n < 8) return Trend::Inconclusive;
  const double total = partial_sums.back();
  if (total <= 0.0) return Trend::Summable;
  const double tail = total - partial_sums[(3 * n) / 4 - 1];
  const double ratio = tail / total;
  if (ratio < 0.005) return Trend::Summable;
  if (ratio > 0.02) return Trend::Diverging;
  return Trend::Inconclusive;
}

const char* trend_name(Trend t) {
  switch (t) {
    case Trend::Diverging: return "diverging-trend";
    case Trend::Summable: return "summable-trend";
    case Trend::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

BlaschkeReport blaschke_report(const std::vector<std::vector<double>>& lambdas,
                               const ConvexRegion& region, int exponent) {
  if (exponent < 1) fail(ErrorKind::Input, "blaschke_report: exponent must be >= 1");
  BlaschkeReport rep;
  rep.exponent = exponent;
  double sum = 0.0;
  for (const auto& p : lambdas) {
    sum += std::pow(dist_to_complement(p, region), exponent);
    rep.partial_sums.push_back(sum);
  }
  rep.trend = classify_trend(rep.partial_sums);
  return rep;
}

Verdict positive_necessary(const Operator& t, const std::vector<double>& lambdas) {
  SelfAdjointTuple s = make_selfadjoint_tuple({hermitian_average(t.mat)}, 1e-10);
  auto [mineig, v] = heig_extreme(s.parts[0], false);
  (void)v;
  if (mineig < -1e-12 * std::max(1.0, opnorm(t.mat)))
    fail(ErrorKind::Input, "positive_necessary: operator is not positive semidefinite");
  std::vector<double> partial;
  double sum = 0.0;
  for (double l : lambdas) {
    sum += l;
    partial.push_back(sum);
  }
  Verdict out;
  out.lhs = sum;
  const Trend trend = classify_trend(partial);
  out.verdict = trend == Trend::Summable ? "infeasible" : "unknown";
  out.flags.push_back(std::string("trend:") + trend_name(trend));
  out.flags.push_back("heuristic:finite-horizon-trend");
  return out;
}

Verdict functional_necessary(const SelfAdjointTuple& s,
                             const std::vector<std::vector<double>>& lambdas,
                             const std::vector<double>& alphas) {
  if (static_cast<int>(alphas.size()) != s.s + 1)
    fail(ErrorKind::Input, "functional_necessary: need (alpha_0, ..., alpha_s)");
  double coeff = 0.0;
  for (int j = 1; j <= s.s; ++j) coeff += alphas[j] * alphas[j];
  if (coeff == 0.0)
    fail(ErrorKind::Input, "functional_necessary: (alpha_1, ..., alpha_s) must be nonzero");

  Matrix v(s.dim, s.dim);
  for (int i = 0; i < s.dim; ++i) v(i, i) = alphas[0];
  for (int j = 1; j <= s.s; ++j)
    for (size_t i = 0; i < v.a.size(); ++i) v.a[i] += alphas[j] * s.parts[j - 1].a[i];
  auto [a, w] = heig_extreme(hermitian_average(v), false);
  (void)w;

  std::vector<double> partial;
  double sum = 0.0;
  for (const auto& lam : lambdas) {
    if (static_cast<int>(lam.size()) != s.s)
      fail(ErrorKind::Input, "functional_necessary: target dimension mismatch");
    double term = alphas[0] - a;
    for (int j = 1; j <= s.s; ++j) term += alphas[j] * lam[j - 1];
    sum += term;
    partial.push_back(sum);
  }
  Verdict out;
  out.lhs = sum;
  out.rhs = a;
  const Trend trend = classify_trend(partial);
  out.verdict = trend == Trend::Summable ? "infeasible" : "unknown";
  out.flags.push_back(std::string("trend:") + trend_name(trend));
  return out;
}

Verdict shift_characterization(const Vec& lambdas) {
  std::vector<double> partial;
  double sum = 0.0;
  for (const auto& l : lambdas) {
    const double m = std::abs(l);
    if (m >= 1.0)
      fail(ErrorKind::Input, "shift_characterization: targets must lie in the open disc");
    sum += 1.0 - m;
    partial.push_back(sum);
  }
  Verdict out;
  out.lhs = sum;
  const Trend trend = classify_trend(partial);
  switch (trend) {
    case Trend::Diverging: out.verdict = "is-diagonal"; break;
    case Trend::Summable: out.verdict = "not-diagonal"; break;
    case Trend::Inconclusive: out.verdict = "inconclusive"; break;
  }
  out.flags.push_back("model:norm<=1,We=closed-disc,non-Fredholm-index-0 (user asserted)");
  out.flags.push_back(std::string("trend:") + trend_name(trend));
  return out;
}

namespace {

cd tail_value(const TailSequence& d) {
  if (d.has_tail) return d.tail;
  if (d.values.empty()) fail(ErrorKind::Input, "sequence: empty with no tail");
  return d.values.back();
}

}  // namespace

bool unitary_diag_condition(const TailSequence& d) {
  if (d.values.empty()) fail(ErrorKind::Input, "unitary condition: empty sequence");
  const cd tail = tail_value(d);
  double inf_mod = std::abs(tail);
  double finite_rhs = 0.0;
  for (const auto& v : d.values) {
    const double m = std::abs(v);
    if (m > 1.0 + 1e-12)
      fail(ErrorKind::Input, "unitary condition: sup |d_n| must be <= 1");
    inf_mod = std::min(inf_mod, m);
    finite_rhs += 1.0 - m;
  }
  if (std::abs(tail) > 1.0 + 1e-12)
    fail(ErrorKind::Input, "unitary condition: tail modulus must be <= 1");
  const double lhs = 2.0 * (1.0 - inf_mod);
  if (std::abs(tail) < 1.0 - 1e-12) return true;  // the tail makes the sum diverge
  return lhs <= finite_rhs + 1e-12;
}

KadisonVerdict kadison_condition(const TailSequence& d) {
  if (d.values.empty()) fail(ErrorKind::Input, "kadison condition: empty sequence");
  KadisonVerdict out;
  auto account = [&](double x) {
    if (x < -1e-12 || x > 1.0 + 1e-12)
      fail(ErrorKind::Input, "kadison condition: entries must lie in [0, 1]");
    if (x < 0.5)
      out.a += x;
    else
      out.b += 1.0 - x;
  };
  for (const auto& v : d.values) {
    if (std::abs(v.imag()) > 1e-12)
      fail(ErrorKind::Input, "kadison condition: entries must be real");
    account(v.real());
  }
  const cd tail = tail_value(d);
  if (std::abs(tail.imag()) > 1e-12)
    fail(ErrorKind::Input, "kadison condition: tail must be real");
  const double tv = tail.real();
  if (tv < -1e-12 || tv > 1.0 + 1e-12)
    fail(ErrorKind::Input, "kadison condition: tail must lie in [0, 1]");
  if (tv > 1e-12 && tv < 0.5) out.a_infinite = true;
  if (tv >= 0.5 && tv < 1.0 - 1e-12) out.b_infinite = true;

  if (out.a_infinite || out.b_infinite) {
    out.verdict = "divergent-admissible";
    return out;
  }
  const double gap = out.a - out.b;
  out.verdict = std::abs(gap - std::round(gap)) <= 1e-9 ? "admissible" : "inadmissible";
  return out;
}

}  // namespace bforge
