// Bounded-count building blocks: the variance envelope of integer variables
// with a fixed mean on {0, ..., d}, the dispersion family Psi_r interpolating
// between its extremes, and the two-stage randomized-rounding sampler that
// realizes any point of that family.
#pragma once

#include <cstdint>
#include <utility>

namespace mvj {

// A conditional mean mu together with its support bound d, 0 <= mu < d.
// (mu == d only ever arises as a degenerate point mass; the sampler accepts
// it directly, see sample_bounded_count.)
struct BoundedMean {
  double mu;
  int d;

  BoundedMean(double mu_, int d_);
};

// First two moments (vartheta1, vartheta2) of a mixing proportion on [0, 1]:
// vartheta1 = E r, vartheta2 = E r^2, so vartheta1^2 <= vartheta2 <= vartheta1.
struct DispersionMoments {
  double vartheta1;
  double vartheta2;

  DispersionMoments(double vartheta1_, double vartheta2_);
};

// Component variances multiplying (vartheta1 - vartheta2) and vartheta2 in the
// conditional-variance decomposition.
struct VarianceComponents {
  double v1;
  double v2;
};

// Greatest integer <= c.
long long floor_delta(double c);

// Smallest possible variance of an integer variable with mean c:
// R(c) = (Delta(c) + 1 - c) * (c - Delta(c)).
double variance_lower(double c);

// Largest possible variance on {0, ..., d} with mean mu: mu * (d - mu).
double variance_upper(const BoundedMean& m);

// Variance of the sampler's output for a fixed mixing proportion r:
// Psi_r = {mu - (1-r) Delta(mu)} * {(1-r)(Delta(mu) + 1) + r d - mu}.
// Psi_0 recovers variance_lower, Psi_1 recovers variance_upper.
double psi_r(const BoundedMean& m, double r);

// V1 = (mu - Delta)(d - Delta - 1) + Delta (Delta + 1 - mu), V2 = Delta (d - Delta - 1)
// with Delta = Delta(mu); satisfy R + V1 + V2 = mu (d - mu).
VarianceComponents variance_components(const BoundedMean& m);

// Var(D | mu) when r has the given moments:
// R(mu) + vartheta1 V1(mu) + vartheta2 V2(mu).
// For a degenerate r (vartheta1 = r, vartheta2 = r^2) this equals psi_r.
double conditional_variance(const BoundedMean& m, const DispersionMoments& vt);

// Randomized rounding: Delta(mu) + 1{u >= 1 + Delta(mu) - mu}. Mean-preserving
// for u uniform on [0, 1). Integer mu is returned unchanged for every u.
long long random_round(double mu, double u);

// Two-point mixture on {kappa1, kappa2} with mean mu (kappa1 <= mu < kappa2):
// returns kappa1 when u0 <= (kappa2 - mu) / (kappa2 - kappa1), else kappa2.
long long binary_mix(long long kappa1, long long kappa2, double mu, double u0);

// The randomized envelope pair: kappa1 rounds (1-r) Delta(mu), kappa2 rounds
// (1-r)(Delta(mu) + 1) + r d. Always kappa1 <= Delta(mu) and kappa2 >= Delta(mu) + 1.
std::pair<long long, long long> kappa_bounds(const BoundedMean& m, double r,
                                             double u1, double u2);

// Full sampler on {0, ..., d}: draw the envelope pair, then the binary mix.
// Exact mean mu for u0, u1, u2 independent uniforms; variance Psi_r for fixed r.
// Accepts mu == d (degenerate) and returns d.
int sample_bounded_count(double mu, int d, double r, double u0, double u1, double u2);

}  // namespace mvj
