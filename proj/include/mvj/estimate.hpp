// Conditional least-squares estimation: the truncated mean recursion and its
// analytic gradient, plain / weighted / optimally-weighted squared-error fits
// driven by a projected quasi-Newton search with deterministic multistarts,
// the closed-form moment estimator of the dispersion pair, and the
// asymptotic covariance plug-ins.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mvj/process.hpp"

namespace mvj {

struct FitConfig {
  int multistarts = 8;          // deterministic starts, 1..8
  int max_iterations = 300;
  double gradient_tol = 1e-7;   // projected-gradient norm, relative to max(1, f)
  double step_tol = 1e-12;      // minimal parameter movement before stopping
  double box_margin = 1e-3;     // coefficient l1-ball radius is 1 - box_margin
  double variance_floor = 1e-8; // floor inside optimal weights / Pearson scale

  void validate() const;
};

struct FitResult {
  ModelSpec spec;
  std::string method;  // "ols", "wls" or "owls"
  ThetaParams theta;
  Eigen::Vector2d vartheta_raw = Eigen::Vector2d::Zero();
  DispersionMoments vartheta{0.0, 0.0};
  Eigen::MatrixXd cov_theta;
  Eigen::Matrix2d cov_vartheta = Eigen::Matrix2d::Zero();
  std::vector<double> fitted_mu;
  std::vector<double> residuals;
  double ssr = 0.0;        // unweighted sum of squared residuals at theta
  double objective = 0.0;  // minimized (possibly weighted) criterion value
  double aic = 0.0;
  double bic = 0.0;
  bool converged = false;
  int iterations = 0;
  double grad_norm = 0.0;
  std::vector<double> multistart_objectives;
  std::vector<std::string> warnings;

  explicit FitResult(const ModelSpec& spec_) : spec(spec_) {}
};

// Truncated conditional-mean recursion: presample counts and means are taken
// as zero, so fitted values depend only on the observed window.
std::vector<double> mu_recursion(const std::vector<int>& counts,
                                 const ThetaParams& theta, const ModelSpec& spec);

// Linear predictor of the next (unobserved) step given the full history and
// the recursion's fitted means.
double next_xi(const std::vector<int>& counts, const std::vector<double>& mu_tilde,
               const ThetaParams& theta, const ModelSpec& spec);

// T x (1 + p1 + p2) Jacobian of the truncated recursion with respect to
// (c, phi, psi); optionally returns the fitted means of the same pass.
Eigen::MatrixXd mu_gradient(const std::vector<int>& counts, const ThetaParams& theta,
                            const ModelSpec& spec,
                            std::vector<double>* mu_out = nullptr);

// Euclidean projection onto the moment region
// {0 <= t1 <= 1, t1^2 <= t2 <= t1}; idempotent, returns a feasible point.
std::pair<double, double> project_dispersion(double t1, double t2);

// Closed-form least-squares fit of (vartheta1, vartheta2) from squared
// residuals against the variance components, with the raw solution, its
// projection, and a heteroskedasticity-robust covariance.
struct VarthetaFit {
  Eigen::Vector2d raw = Eigen::Vector2d::Zero();
  DispersionMoments projected{0.0, 0.0};
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  bool reduced_rank = false;
  std::vector<std::string> warnings;
};

VarthetaFit vartheta_fit(const std::vector<int>& counts,
                         const std::vector<double>& fitted_mu, int d);

// Moving-block bootstrap standard errors for the projected dispersion pair.
Eigen::Vector2d vartheta_bootstrap_sd(const std::vector<int>& counts,
                                      const std::vector<double>& fitted_mu, int d,
                                      int n_resamples, std::uint64_t seed);

// Sandwich ingredients at a fitted point. k1 and gamma1 are the weighted
// outer-product averages, sandwich = k1^{-1} gamma1 k1^{-1} / T, and
// sigma_inv is the optimal-weight information plug-in used by the
// optimally-weighted fit.
struct CovMatrices {
  Eigen::MatrixXd k1, gamma1, sandwich, sigma_inv;
  double k1_condition = 0.0;
  std::vector<std::string> warnings;
};

CovMatrices covariance_matrices(const std::vector<int>& counts,
                                const ThetaParams& theta, const DispersionMoments& vt,
                                const std::vector<double>& weights,
                                const ModelSpec& spec, double variance_floor);

// Unweighted conditional least squares.
FitResult ols_fit(const std::vector<int>& counts, const ModelSpec& spec,
                  const FitConfig& cfg = {});

// Weighted conditional least squares with caller-supplied strictly positive
// weights (one per observation).
FitResult wls_fit(const std::vector<int>& counts, const ModelSpec& spec,
                  const std::vector<double>& weights, const FitConfig& cfg = {});

// Two-step optimally weighted fit: an unweighted pass fixes the weights
// 1 / max(R(mu_hat) + h_hat, floor), then a weighted pass re-estimates theta.
FitResult owls_fit(const std::vector<int>& counts, const ModelSpec& spec,
                   const FitConfig& cfg = {});

}  // namespace mvj
