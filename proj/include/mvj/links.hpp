// Clipped-Laplace link family: smooth, strictly increasing maps from the real
// line into the open interval (0, d), linear with slope s on [0, d] and with
// Laplace-CDF tails spliced on either side.
#pragma once

namespace mvj {

// Adjustment scale sigma > 0 and integer support bound d >= 1 for one link.
struct LinkSpec {
  double sigma;
  int d;

  LinkSpec(double sigma_, int d_);
};

// Standard Laplace distribution function (location 0, scale 1).
double laplace_cdf(double u);

// Standard Laplace density.
double laplace_pdf(double u);

// L_sigma(u) = -sigma * log(1 - F(u / sigma)); equals u + sigma * log 2 for
// u >= 0 and decays to 0 as u -> -infinity.
double laplace_link(double u, double sigma);

// Derivative of laplace_link: 1 for u >= 0, strictly inside (0, 1) for u < 0.
double laplace_link_deriv(double u, double sigma);

// Slope of the linear mid-section: s = (d/2) / (d/2 + sigma * log 2).
double scale_factor(const LinkSpec& spec);

// min(max(u, 0), d): the sigma -> 0 limit of the clipped-Laplace link.
double clipped_relu(double u, int d);

// The link itself. Maps R onto (0, d), fixes the midpoint d/2, and is point
// symmetric about (d/2, d/2).
double clipped_laplace(double u, const LinkSpec& spec);

// Derivative of clipped_laplace; equals s on [0, d] and tapers to 0 in the
// tails.
double clipped_laplace_deriv(double u, const LinkSpec& spec);

}  // namespace mvj
