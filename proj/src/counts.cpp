#include "mvj/counts.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace {

void require_unit(double u, const char* where) {
  if (!(u >= 0.0 && u <= 1.0))
    throw std::invalid_argument(std::string(where) + ": uniform draw outside [0, 1]");
}

}  // namespace

namespace mvj {

BoundedMean::BoundedMean(double mu_, int d_) : mu(mu_), d(d_) {
  if (d < 1) throw std::invalid_argument("BoundedMean: d must be a positive integer");
  if (!(mu >= 0.0 && mu < static_cast<double>(d)))
    throw std::invalid_argument("BoundedMean: mu must lie in [0, d)");
}

DispersionMoments::DispersionMoments(double vartheta1_, double vartheta2_)
    : vartheta1(vartheta1_), vartheta2(vartheta2_) {
  if (!(vartheta1 >= 0.0 && vartheta1 <= 1.0))
    throw std::invalid_argument("DispersionMoments: vartheta1 must lie in [0, 1]");
  if (!(vartheta2 <= vartheta1))
    throw std::invalid_argument("DispersionMoments: vartheta2 must not exceed vartheta1");
  if (!(vartheta2 >= vartheta1 * vartheta1))
    throw std::invalid_argument("DispersionMoments: vartheta2 must be >= vartheta1^2");
}

long long floor_delta(double c) {
  if (!std::isfinite(c)) throw std::invalid_argument("floor_delta: non-finite input");
  return static_cast<long long>(std::floor(c));
}

double variance_lower(double c) {
  const double delta = static_cast<double>(floor_delta(c));
  return (delta + 1.0 - c) * (c - delta);
}

double variance_upper(const BoundedMean& m) { return m.mu * (m.d - m.mu); }

double psi_r(const BoundedMean& m, double r) {
  if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("psi_r: r must lie in [0, 1]");
  const double delta = static_cast<double>(floor_delta(m.mu));
  const double q = 1.0 - r;
  return (m.mu - q * delta) * (q * (delta + 1.0) + r * m.d - m.mu);
}

VarianceComponents variance_components(const BoundedMean& m) {
  const double delta = static_cast<double>(floor_delta(m.mu));
  const double span = m.d - delta - 1.0;
  VarianceComponents out;
  out.v1 = (m.mu - delta) * span + delta * (delta + 1.0 - m.mu);
  out.v2 = delta * span;
  return out;
}

double conditional_variance(const BoundedMean& m, const DispersionMoments& vt) {
  const VarianceComponents vc = variance_components(m);
  return variance_lower(m.mu) + vt.vartheta1 * vc.v1 + vt.vartheta2 * vc.v2;
}

long long random_round(double mu, double u) {
  require_unit(u, "random_round");
  const long long delta = floor_delta(mu);
  if (static_cast<double>(delta) == mu) return delta;  // integer mean: nothing to round
  return delta + (u >= 1.0 + static_cast<double>(delta) - mu ? 1 : 0);
}

long long binary_mix(long long kappa1, long long kappa2, double mu, double u0) {
  require_unit(u0, "binary_mix");
  if (!(kappa1 <= mu && mu < static_cast<double>(kappa2)))
    throw std::invalid_argument("binary_mix: mean must lie in [kappa1, kappa2)");
  const double p_low = (static_cast<double>(kappa2) - mu) /
                       static_cast<double>(kappa2 - kappa1);
  return u0 <= p_low ? kappa1 : kappa2;
}

std::pair<long long, long long> kappa_bounds(const BoundedMean& m, double r,
                                             double u1, double u2) {
  if (!(r >= 0.0 && r <= 1.0))
    throw std::invalid_argument("kappa_bounds: r must lie in [0, 1]");
  const long long delta = floor_delta(m.mu);
  const double q = 1.0 - r;
  const double low = std::max(q * static_cast<double>(delta), 0.0);
  const double high =
      std::min(q * static_cast<double>(delta + 1) + r * m.d, static_cast<double>(m.d));
  // Rounding guards: the pair must bracket the cell [Delta, Delta + 1] even
  // when the convex combinations above land a final-place unit outside it.
  const long long kappa1 = std::min(random_round(low, u1), delta);
  const long long kappa2 = std::max(random_round(high, u2), delta + 1);
  return {kappa1, kappa2};
}

int sample_bounded_count(double mu, int d, double r, double u0, double u1, double u2) {
  if (d < 1) throw std::invalid_argument("sample_bounded_count: d must be positive");
  if (!(mu >= 0.0 && mu <= static_cast<double>(d)))
    throw std::invalid_argument("sample_bounded_count: mu must lie in [0, d]");
  if (mu == static_cast<double>(d)) return d;  // degenerate point mass at the bound
  const BoundedMean m(mu, d);
  const auto [kappa1, kappa2] = kappa_bounds(m, r, u1, u2);
  return static_cast<int>(binary_mix(kappa1, kappa2, mu, u0));
}

}  // namespace mvj
