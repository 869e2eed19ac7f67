#include "mvj/links.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mvj {

LinkSpec::LinkSpec(double sigma_, int d_) : sigma(sigma_), d(d_) {
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw std::invalid_argument("LinkSpec: sigma must be finite and > 0");
  if (d < 1) throw std::invalid_argument("LinkSpec: d must be a positive integer");
}

double laplace_cdf(double u) {
  if (std::isnan(u)) throw std::invalid_argument("laplace_cdf: NaN input");
  return u <= 0.0 ? 0.5 * std::exp(u) : 1.0 - 0.5 * std::exp(-u);
}

double laplace_pdf(double u) { return 0.5 * std::exp(-std::abs(u)); }

double laplace_link(double u, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("laplace_link: sigma must be > 0");
  const double z = u / sigma;
  if (z >= 0.0) return u + sigma * std::log(2.0);
  // -sigma * log(1 - 0.5 e^z); log1p keeps full precision for z << 0.
  return -sigma * std::log1p(-0.5 * std::exp(z));
}

double laplace_link_deriv(double u, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("laplace_link_deriv: sigma must be > 0");
  const double z = u / sigma;
  if (z >= 0.0) return 1.0;
  const double e = 0.5 * std::exp(z);
  return e / (1.0 - e);
}

double scale_factor(const LinkSpec& spec) {
  const double half = 0.5 * spec.d;
  return half / (half + spec.sigma * std::log(2.0));
}

double clipped_relu(double u, int d) {
  return std::min(std::max(u, 0.0), static_cast<double>(d));
}

double clipped_laplace(double u, const LinkSpec& spec) {
  if (std::isnan(u)) throw std::invalid_argument("clipped_laplace: NaN input");
  const double s = scale_factor(spec);
  const double d = spec.d;
  // Each branch is the closed form of s * {L(u) - L(u - d)} on its region;
  // the tail branches share one expression so the map is exactly point
  // symmetric about (d/2, d/2) and never overflows.
  if (u < 0.0) return -s * spec.sigma * std::log1p(-0.5 * std::exp(u / spec.sigma));
  if (u > d) return d + s * spec.sigma * std::log1p(-0.5 * std::exp((d - u) / spec.sigma));
  return s * u + 0.5 * d * (1.0 - s);
}

double clipped_laplace_deriv(double u, const LinkSpec& spec) {
  if (std::isnan(u)) throw std::invalid_argument("clipped_laplace_deriv: NaN input");
  const double s = scale_factor(spec);
  const double d = spec.d;
  if (u < 0.0) return s * laplace_link_deriv(u, spec.sigma);
  if (u > d) return s * laplace_link_deriv(d - u, spec.sigma);
  return s;
}

}  // namespace mvj
