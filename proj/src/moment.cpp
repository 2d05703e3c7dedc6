#include "bforge/moment.hpp"

#include <algorithm>
#include <cmath>

#include "bforge/linalg.hpp"

namespace bforge {

namespace {

double max_norm(const Vec& v) {
  double m = 0.0;
  for (const auto& z : v) m = std::max(m, std::abs(z));
  return m;
}

void decompose_rec(const Vec& eps, double rho, Vec& points,
                   std::vector<double>& weights) {
  const int n = static_cast<int>(eps.size());
  if (n == 0) return;
  if (n > 1) decompose_rec(Vec(eps.begin(), eps.end() - 1), rho, points, weights);

  cd defect = eps[n - 1];
  for (size_t j = 0; j < points.size(); ++j)
    defect -= weights[j] * std::pow(points[j], n);
  if (std::abs(defect) == 0.0) return;

  // n equally spaced points: the common phase arg(defect)/n makes the n-th
  // moment land on the defect while moments below n cancel by symmetry
  const double rhon = std::pow(rho, n);
  const double phase = std::arg(defect) / n;
  const double beta = std::abs(defect) / (n * rhon);
  for (int j = 1; j <= n; ++j) {
    points.push_back(rho * std::exp(cd(0.0, phase + 2.0 * M_PI * j / n)));
    weights.push_back(beta);
  }
}

}  // namespace

double b_bound(int n, double rho) {
  if (n < 1) fail(ErrorKind::Input, "b_bound: n must be >= 1");
  if (!(rho > 0.0)) fail(ErrorKind::Input, "b_bound: rho must be > 0");
  double b = 1.0 / rho;
  double rhok = 1.0 / rho;
  for (int k = 2; k <= n; ++k) {
    rhok /= rho;
    b = 2.0 * b + rhok;
  }
  return b;
}

MomentDecomposition circle_moment_decompose(const Vec& eps, double rho) {
  if (eps.empty()) fail(ErrorKind::Input, "moment decomposition: empty target");
  if (!(rho > 0.0)) fail(ErrorKind::Input, "moment decomposition: rho must be > 0");
  MomentDecomposition d;
  d.rho = rho;
  d.n = static_cast<int>(eps.size());
  d.eps = eps;
  decompose_rec(eps, rho, d.points, d.weights);
  return d;
}

double moment_reconstruction_residual(const MomentDecomposition& d) {
  double worst = 0.0;
  for (int k = 1; k <= d.n; ++k) {
    cd s = 0.0;
    for (size_t j = 0; j < d.points.size(); ++j)
      s += d.weights[j] * std::pow(d.points[j], k);
    worst = std::max(worst, std::abs(s - d.eps[k - 1]));
  }
  return worst;
}

Vec apply_G(cd lambda, const Vec& z) {
  const int n = static_cast<int>(z.size());
  Vec w(n);
  // binomial table up to n
  std::vector<std::vector<double>> ch(n + 1, std::vector<double>(n + 1, 0.0));
  for (int i = 0; i <= n; ++i) {
    ch[i][0] = 1.0;
    for (int j = 1; j <= i; ++j)
      ch[i][j] = ch[i - 1][j - 1] + (j <= i - 1 ? ch[i - 1][j] : 0.0);
  }
  for (int k = 1; k <= n; ++k) {
    cd s = std::pow(lambda, k);
    for (int j = 1; j <= k; ++j) s += ch[k][j] * z[j - 1] * std::pow(lambda, k - j);
    w[k - 1] = s;
  }
  return w;
}

Vec invert_G(cd lambda, const Vec& w) {
  // G_{-lambda} G_lambda is the identity on C^n.
  return apply_G(-lambda, w);
}

double hull_distance_lower_bound(cd lambda, double rho, int n) {
  if (n < 1) fail(ErrorKind::Input, "hull bound: n must be >= 1");
  if (!(rho > 0.0)) fail(ErrorKind::Input, "hull bound: rho must be > 0");
  if (rho > 1.0) fail(ErrorKind::Input, "hull bound: stated only for rho <= 1");
  const double rhon = std::pow(rho, n);
  if (std::abs(lambda) == 0.0) return rhon / std::pow(2.0, n);
  return rhon / (std::pow(4.0, n) * std::max(1.0, std::pow(std::abs(lambda), n)));
}

bool winf_membership_power(const Vec& mu, double rho) {
  if (mu.empty()) fail(ErrorKind::Input, "winf membership: empty tuple");
  if (!(rho > 0.0)) fail(ErrorKind::Input, "winf membership: rho must be > 0");
  const int n = static_cast<int>(mu.size());
  const double reff = std::min(rho, 1.0);
  return max_norm(mu) < std::pow(reff, n) / std::pow(2.0, n);
}

HullOracle hull_oracle(cd lambda, double rho, int n, int grid, uint64_t seed) {
  if (grid < n + 1) fail(ErrorKind::Input, "hull oracle: grid must exceed n");
  HullOracle o;
  o.curve_points.reserve(grid);
  for (int k = 0; k < grid; ++k) {
    const cd mu = lambda + rho * std::exp(cd(0.0, 2.0 * M_PI * k / grid));
    Vec p(n);
    cd acc = 1.0;
    for (int j = 0; j < n; ++j) {
      acc *= mu;
      p[j] = acc;
    }
    o.curve_points.push_back(std::move(p));
  }
  Rng rng(seed + 0x5eedULL);
  for (int t = 0; t < grid; ++t) {
    std::vector<double> w(o.curve_points.size());
    double tot = 0.0;
    for (auto& x : w) {
      x = rng.uniform();
      tot += x;
    }
    Vec p(n, cd(0.0));
    for (size_t j = 0; j < w.size(); ++j)
      for (int i = 0; i < n; ++i) p[i] += (w[j] / tot) * o.curve_points[j][i];
    o.hull_samples.push_back(std::move(p));
  }
  return o;
}

HullMembership hull_membership_certificate(const Vec& w, cd lambda, double rho) {
  const int n = static_cast<int>(w.size());
  Vec z = invert_G(lambda, w);
  MomentDecomposition d = circle_moment_decompose(z, rho);
  HullMembership m;
  const double total = d.weight_sum();
  if (total > 1.0 + 1e-12)
    fail(ErrorKind::Geometry,
         "hull membership: decomposition weights exceed a convex combination");
  m.base_weight = std::max(0.0, 1.0 - total);
  m.weights = d.weights;
  m.circle_points.reserve(d.points.size());
  Vec recon(n, cd(0.0));
  for (size_t j = 0; j < d.points.size(); ++j) {
    const cd nu = lambda + d.points[j];
    m.circle_points.push_back(nu);
    cd acc = 1.0;
    for (int k = 0; k < n; ++k) {
      acc *= nu;
      recon[k] += d.weights[j] * acc;
    }
  }
  cd lacc = 1.0;
  for (int k = 0; k < n; ++k) {
    lacc *= lambda;
    recon[k] += m.base_weight * lacc;
  }
  double resid = 0.0;
  for (int k = 0; k < n; ++k) resid = std::max(resid, std::abs(recon[k] - w[k]));
  m.residual = resid;
  return m;
}

}  // namespace bforge
