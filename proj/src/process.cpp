#include "mvj/process.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mvj/estimate.hpp"

namespace {

// True iff 1 - a_1 z - ... - a_p z^p has no root in the closed unit disk.
// Sufficient shortcut: sum |a_i| < 1. Otherwise the inverse roots are the
// eigenvalues of the companion matrix; require them strictly inside the
// circle with a 1e-8 margin.
bool roots_outside_unit_disk(const std::vector<double>& a) {
  std::size_t p = a.size();
  while (p > 0 && a[p - 1] == 0.0) --p;
  if (p == 0) return true;
  double abs_sum = 0.0;
  for (std::size_t i = 0; i < p; ++i) abs_sum += std::abs(a[i]);
  if (abs_sum < 1.0) return true;
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(p, p);
  for (std::size_t j = 0; j < p; ++j) companion(0, j) = a[j];
  for (std::size_t i = 1; i < p; ++i) companion(i, i - 1) = 1.0;
  const Eigen::VectorXcd lambda = companion.eigenvalues();
  double max_mod = 0.0;
  for (Eigen::Index i = 0; i < lambda.size(); ++i)
    max_mod = std::max(max_mod, std::abs(lambda[i]));
  return max_mod < 1.0 - 1e-8;
}

void require_matching_orders(const mvj::ThetaParams& theta, const mvj::ModelSpec& spec,
                             const char* where) {
  if (theta.p1() != spec.p1 || theta.p2() != spec.p2)
    throw std::invalid_argument(std::string(where) +
                                ": theta orders do not match the model spec");
}

}  // namespace

namespace mvj {

ModelSpec::ModelSpec(int p1_, int p2_, int d_, double sigma_, int offset_a_)
    : p1(p1_), p2(p2_), d(d_), sigma(sigma_), offset_a(offset_a_) {
  if (p1 < 1) throw std::invalid_argument("ModelSpec: p1 must be >= 1");
  if (p2 < 0) throw std::invalid_argument("ModelSpec: p2 must be >= 0");
  if (d < 1) throw std::invalid_argument("ModelSpec: d must be a positive integer");
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw std::invalid_argument("ModelSpec: sigma must be finite and > 0");
}

ThetaParams::ThetaParams(double c_, std::vector<double> phi_, std::vector<double> psi_)
    : c(c_), phi(std::move(phi_)), psi(std::move(psi_)) {
  if (!std::isfinite(c)) throw std::invalid_argument("ThetaParams: non-finite intercept");
  for (double v : phi)
    if (!std::isfinite(v)) throw std::invalid_argument("ThetaParams: non-finite phi");
  for (double v : psi)
    if (!std::isfinite(v)) throw std::invalid_argument("ThetaParams: non-finite psi");
}

double ThetaParams::abs_coef_sum() const {
  double s = 0.0;
  for (double v : phi) s += std::abs(v);
  for (double v : psi) s += std::abs(v);
  return s;
}

bool ThetaParams::in_theta0() const { return abs_coef_sum() < 1.0; }

bool ThetaParams::in_theta1() const {
  if (c < 0.0) return false;
  double s = c;
  for (double v : phi) {
    if (v < 0.0) return false;
    s += v;
  }
  for (double v : psi) {
    if (v < 0.0) return false;
    s += v;
  }
  return s < 1.0;
}

std::vector<double> ThetaParams::flat() const {
  std::vector<double> x;
  x.reserve(1 + phi.size() + psi.size());
  x.push_back(c);
  x.insert(x.end(), phi.begin(), phi.end());
  x.insert(x.end(), psi.begin(), psi.end());
  return x;
}

ThetaParams ThetaParams::from_flat(const std::vector<double>& x, int p1, int p2) {
  if (static_cast<int>(x.size()) != 1 + p1 + p2)
    throw std::invalid_argument("ThetaParams::from_flat: wrong length");
  return ThetaParams(x[0], std::vector<double>(x.begin() + 1, x.begin() + 1 + p1),
                     std::vector<double>(x.begin() + 1 + p1, x.end()));
}

RDistribution RDistribution::Beta(double alpha, double beta) {
  if (!(alpha > 0.0) || !(beta > 0.0))
    throw std::invalid_argument("RDistribution::Beta: shapes must be > 0");
  RDistribution out;
  out.kind = Kind::beta;
  out.alpha = alpha;
  out.beta = beta;
  return out;
}

RDistribution RDistribution::Constant(double r0) {
  if (!(r0 >= 0.0 && r0 <= 1.0))
    throw std::invalid_argument("RDistribution::Constant: r0 must lie in [0, 1]");
  RDistribution out;
  out.kind = Kind::constant;
  out.r0 = r0;
  return out;
}

RDistribution RDistribution::TwoMoment(double m1, double m2) {
  DispersionMoments check(m1, m2);  // validates the moment inequalities
  RDistribution out;
  out.kind = Kind::two_moment;
  out.m1 = check.vartheta1;
  out.m2 = check.vartheta2;
  return out;
}

double RDistribution::sample(Philox& rng) const {
  switch (kind) {
    case Kind::beta:
      return rng.next_beta(alpha, beta);
    case Kind::constant:
      return r0;
    case Kind::two_moment:
      break;
  }
  throw std::logic_error("RDistribution::sample: two-moment specification is not samplable");
}

DispersionMoments RDistribution::moments() const {
  switch (kind) {
    case Kind::beta: {
      const double s = alpha + beta;
      return DispersionMoments(alpha / s, alpha * (alpha + 1.0) / (s * (s + 1.0)));
    }
    case Kind::constant:
      return DispersionMoments(r0, r0 * r0);
    case Kind::two_moment:
      return DispersionMoments(m1, m2);
  }
  throw std::logic_error("RDistribution::moments: unreachable");
}

StationarityReport check_stationarity(const ThetaParams& theta, const ModelSpec& spec) {
  require_matching_orders(theta, spec, "check_stationarity");
  StationarityReport rep;
  rep.psi_poly_ok = roots_outside_unit_disk(theta.psi);
  const int p = std::max(spec.p1, spec.p2);
  std::vector<double> plus(p, 0.0);
  for (int i = 0; i < p; ++i) {
    const double phi_i = i < spec.p1 ? std::max(theta.phi[i], 0.0) : 0.0;
    const double psi_i = i < spec.p2 ? std::max(theta.psi[i], 0.0) : 0.0;
    plus[i] = phi_i + psi_i;
  }
  rep.phi_star_ok = roots_outside_unit_disk(plus);
  rep.theta0_member = theta.in_theta0();
  rep.theta1_member = theta.in_theta1();
  return rep;
}

SimulatedPath simulate_mvj(const ThetaParams& theta, const RDistribution& rdist,
                           const ModelSpec& spec, int T, int burn_in,
                           std::uint64_t seed, std::uint64_t stream) {
  require_matching_orders(theta, spec, "simulate_mvj");
  if (T < 1) throw std::invalid_argument("simulate_mvj: T must be >= 1");
  if (burn_in < 0) throw std::invalid_argument("simulate_mvj: burn_in must be >= 0");
  if (!rdist.samplable())
    throw std::invalid_argument("simulate_mvj: mixing distribution is not samplable");

  const LinkSpec link = spec.link();
  Philox rng(seed, stream);

  std::vector<int> d_lags(spec.p1, static_cast<int>(std::llround(0.5 * spec.d)));
  std::vector<double> mu_lags(spec.p2, 0.5 * spec.d);

  SimulatedPath out;
  out.counts.reserve(T);
  out.mu.reserve(T);
  out.xi.reserve(T);
  out.r.reserve(T);
  out.seed = seed;
  out.stream = stream;

  const long total = static_cast<long>(burn_in) + T;
  for (long t = 0; t < total; ++t) {
    double xi = theta.c;
    for (int i = 0; i < spec.p1; ++i) xi += theta.phi[i] * d_lags[i];
    for (int j = 0; j < spec.p2; ++j) xi += theta.psi[j] * mu_lags[j];
    const double mu = clipped_laplace(xi, link);
    const double r = rdist.sample(rng);
    const double u0 = rng.next_double();
    const double u1 = rng.next_double();
    const double u2 = rng.next_double();
    const int D = sample_bounded_count(mu, spec.d, r, u0, u1, u2);

    for (int i = spec.p1 - 1; i > 0; --i) d_lags[i] = d_lags[i - 1];
    d_lags[0] = D;
    for (int j = spec.p2 - 1; j > 0; --j) mu_lags[j] = mu_lags[j - 1];
    if (spec.p2 > 0) mu_lags[0] = mu;

    if (t >= burn_in) {
      out.counts.push_back(D);
      out.mu.push_back(mu);
      out.xi.push_back(xi);
      out.r.push_back(r);
    }
  }
  return out;
}

double stationary_mean(const ThetaParams& theta, const ModelSpec& spec) {
  require_matching_orders(theta, spec, "stationary_mean");
  const StationarityReport rep = check_stationarity(theta, spec);
  if (!rep.stationary() || !rep.theta0_member)
    throw std::domain_error("stationary_mean: parameters fail the stationarity screen");
  const double s = scale_factor(spec.link());
  double coef_sum = 0.0;
  for (double v : theta.phi) coef_sum += v;
  for (double v : theta.psi) coef_sum += v;
  const double c_star = theta.c * s + 0.5 * spec.d * (1.0 - s);
  const double denom = 1.0 - s * coef_sum;
  if (!(denom > 0.0))
    throw std::domain_error("stationary_mean: contracted system is not summable");
  return c_star / denom;
}

std::vector<double> pi_weights(const ThetaParams& theta, const ModelSpec& spec,
                               int n_terms) {
  require_matching_orders(theta, spec, "pi_weights");
  if (n_terms < 1) throw std::invalid_argument("pi_weights: n_terms must be >= 1");
  const StationarityReport rep = check_stationarity(theta, spec);
  if (!rep.stationary() || !rep.theta0_member)
    throw std::domain_error("pi_weights: parameters fail the stationarity screen");

  const double s = scale_factor(spec.link());
  const int p = std::max(spec.p1, spec.p2);
  std::vector<double> varphi(p, 0.0);
  for (int i = 0; i < p; ++i) {
    const double phi_i = i < spec.p1 ? theta.phi[i] : 0.0;
    const double psi_i = i < spec.p2 ? theta.psi[i] : 0.0;
    varphi[i] = s * (phi_i + psi_i);
  }

  std::vector<double> w(n_terms, 0.0);
  w[0] = 1.0;
  for (int k = 1; k < n_terms; ++k) {
    double acc = k <= spec.p2 ? -s * theta.psi[k - 1] : 0.0;
    const int m = std::min(k, p);
    for (int i = 1; i <= m; ++i) acc += varphi[i - 1] * w[k - i];
    w[k] = acc;
  }
  return w;
}

std::vector<double> theoretical_acf(const ThetaParams& theta, const ModelSpec& spec,
                                    int max_lag) {
  if (max_lag < 1) throw std::invalid_argument("theoretical_acf: max_lag must be >= 1");
  // Grow the moving-average expansion until its tail is negligible relative
  // to the largest weight seen, then form the overlap sums.
  const int p = std::max(spec.p1, spec.p2);
  int n = std::max(64, max_lag + 16);
  const int n_cap = 1 << 20;
  std::vector<double> w;
  for (;;) {
    w = pi_weights(theta, spec, n);
    double w_max = 0.0;
    for (double v : w) w_max = std::max(w_max, std::abs(v));
    double tail = 0.0;
    const int span = std::max(p, 8);
    for (int i = n - span; i < n; ++i) tail = std::max(tail, std::abs(w[i]));
    if (tail <= 1e-13 * w_max) break;
    if (n >= n_cap)
      throw std::runtime_error("theoretical_acf: moving-average expansion did not converge");
    n *= 2;
  }

  double denom = 0.0;
  for (double v : w) denom += v * v;
  std::vector<double> rho(max_lag, 0.0);
  for (int k = 1; k <= max_lag; ++k) {
    double num = 0.0;
    for (int i = 0; i + k < n; ++i) num += w[i] * w[i + k];
    rho[k - 1] = num / denom;
  }
  return rho;
}

Forecast one_step_forecast(const std::vector<int>& counts, const ThetaParams& theta,
                           const DispersionMoments& vt, const ModelSpec& spec) {
  require_matching_orders(theta, spec, "one_step_forecast");
  if (counts.empty()) throw std::invalid_argument("one_step_forecast: empty history");
  const std::vector<double> mu_tilde = mu_recursion(counts, theta, spec);
  const double xi_next = next_xi(counts, mu_tilde, theta, spec);
  const double mean = clipped_laplace(xi_next, spec.link());
  Forecast out;
  out.mean = mean;
  out.variance = conditional_variance(BoundedMean(mean, spec.d), vt);
  return out;
}

}  // namespace mvj
