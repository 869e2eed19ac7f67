// The joint mean/variance count process itself: parameter containers,
// stationarity checks, simulation, stationary moments, and the one-step
// conditional forecast.
#pragma once

#include <cstdint>
#include <vector>

#include "mvj/counts.hpp"
#include "mvj/links.hpp"
#include "mvj/rng.hpp"

namespace mvj {

// Model frame: autoregressive orders, support bound, link scale, and the
// integer offset a of the observed range {a, ..., a + d}.
struct ModelSpec {
  int p1;
  int p2;
  int d;
  double sigma;
  int offset_a = 0;

  ModelSpec(int p1_, int p2_, int d_, double sigma_, int offset_a_ = 0);

  LinkSpec link() const { return LinkSpec(sigma, d); }
  int n_params() const { return 1 + p1 + p2; }
};

// Regression parameters: intercept c, count-feedback coefficients phi
// (length p1), mean-feedback coefficients psi (length p2).
struct ThetaParams {
  double c;
  std::vector<double> phi;
  std::vector<double> psi;

  ThetaParams() : c(0.0) {}
  ThetaParams(double c_, std::vector<double> phi_, std::vector<double> psi_);

  int p1() const { return static_cast<int>(phi.size()); }
  int p2() const { return static_cast<int>(psi.size()); }

  // Sum of |phi_i| + |psi_j|.
  double abs_coef_sum() const;

  // Contraction region: sum of absolute coefficients < 1, intercept free.
  bool in_theta0() const;

  // Nonnegative region: c >= 0, all coefficients >= 0, c + sum < 1.
  bool in_theta1() const;

  // Flat layout (c, phi_1..phi_p1, psi_1..psi_p2) used by the optimizer and
  // the CLI.
  std::vector<double> flat() const;
  static ThetaParams from_flat(const std::vector<double>& x, int p1, int p2);
};

// Distribution of the mixing proportion r_t on [0, 1]. `two_moment` carries
// only (E r, E r^2) and cannot be sampled, only used in variance formulas.
struct RDistribution {
  enum class Kind { beta, constant, two_moment };

  Kind kind = Kind::beta;
  double alpha = 1.0, beta = 1.0;  // beta kind
  double r0 = 0.0;                 // constant kind
  double m1 = 0.0, m2 = 0.0;       // two_moment kind

  static RDistribution Beta(double alpha, double beta);
  static RDistribution Constant(double r0);
  static RDistribution TwoMoment(double m1, double m2);

  bool samplable() const { return kind != Kind::two_moment; }
  double sample(Philox& rng) const;
  DispersionMoments moments() const;
};

// Outcome of the stationarity screen: the two characteristic-polynomial
// checks plus membership of the two parameter regions.
struct StationarityReport {
  bool psi_poly_ok;     // 1 - sum psi_j z^j has no root in the closed unit disk
  bool phi_star_ok;     // same for 1 - sum (phi_i^+ + psi_i^+) z^i
  bool theta0_member;
  bool theta1_member;

  bool stationary() const { return psi_poly_ok && phi_star_ok; }
};

StationarityReport check_stationarity(const ThetaParams& theta, const ModelSpec& spec);

// A simulated trajectory (post burn-in) with its latent pieces retained.
struct SimulatedPath {
  std::vector<int> counts;   // D_t on {0, ..., d}
  std::vector<double> mu;    // conditional means
  std::vector<double> xi;    // linear predictors
  std::vector<double> r;     // mixing draws
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

// Simulate T observations after burn_in warm-up steps. Lag buffers start at
// the mid-range point (round(d/2) for counts, d/2 for means). Draw order per
// step: r, then u0, u1, u2. Fully determined by (seed, stream).
SimulatedPath simulate_mvj(const ThetaParams& theta, const RDistribution& rdist,
                           const ModelSpec& spec, int T, int burn_in,
                           std::uint64_t seed, std::uint64_t stream = 0);

// Stationary mean c* / (1 - sum phi* - sum psi*) of the contracted linear
// system, with c* = c s + (d/2)(1 - s), phi* = s phi, psi* = s psi. Requires
// nonnegative parameters (in_theta1) and the stationarity screen to pass.
double stationary_mean(const ThetaParams& theta, const ModelSpec& spec);

// First n_terms coefficients of the moving-average expansion of the
// contracted system: w_0 = 1, w_k = delta_k + sum_i varphi_i w_{k-i} with
// varphi_i = s (phi_i + psi_i), delta_k = -s psi_k.
std::vector<double> pi_weights(const ThetaParams& theta, const ModelSpec& spec,
                               int n_terms);

// Stationary autocorrelations rho_1..rho_max_lag of the contracted system:
// rho_k = sum_i w_i w_{i+k} / sum_i w_i^2, with the expansion length chosen
// adaptively until the tail is negligible.
std::vector<double> theoretical_acf(const ThetaParams& theta, const ModelSpec& spec,
                                    int max_lag);

struct Forecast {
  double mean;
  double variance;
};

// One-step-ahead conditional mean and variance given an observed history,
// using the same truncated mean recursion as the estimator (pre-sample terms
// zero), so fitted and forecast paths agree bit for bit.
Forecast one_step_forecast(const std::vector<int>& counts, const ThetaParams& theta,
                           const DispersionMoments& vt, const ModelSpec& spec);

}  // namespace mvj
