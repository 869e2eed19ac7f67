// Order selection over a grid of autoregressive orders via squared-error
// information criteria, plus residual diagnostics: Pearson residuals, mean
// absolute / squared-scaled errors, and sample ACF / PACF.
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mvj/estimate.hpp"

namespace mvj {

// T log(ssr / T) + 2 (3 + p1 + p2); exactly -infinity when ssr == 0.
double aic(double ssr, int T, int p1, int p2);

// T log(ssr / T) + log(T - max(p1, p2) - 1) (3 + p1 + p2).
double bic(double ssr, int T, int p1, int p2);

struct OrderGrid {
  int p1_max = 2;
  int p2_max = 2;
};

struct CriterionCell {
  int p1 = 0, p2 = 0;
  double aic = 0.0, bic = 0.0, ssr = 0.0;
  bool ok = false;
  std::string error;
};

struct SelectionResult {
  std::pair<int, int> aic_choice;
  std::pair<int, int> bic_choice;
  std::vector<CriterionCell> table;
};

// Smallest criterion value among successful cells; ties broken toward the
// smaller total order p1 + p2, then the smaller p1.
std::pair<int, int> pick_order(const std::vector<CriterionCell>& table, bool use_bic);

// Fit every (p1, p2) with 1 <= p1 <= p1_max, 0 <= p2 <= p2_max by unweighted
// least squares and tabulate both criteria. Cells whose fit fails are kept
// in the table with their error text and skipped by the pick.
SelectionResult select_order(const std::vector<int>& counts, const OrderGrid& grid,
                             const ModelSpec& base, const FitConfig& cfg = {});

// (D_t - mu_t) / sqrt(max(Var(D_t | past), floor)).
std::vector<double> pearson_residuals(const std::vector<int>& counts,
                                      const ThetaParams& theta,
                                      const DispersionMoments& vt,
                                      const ModelSpec& spec, double variance_floor);

struct AdequacyStats {
  double mar;   // mean absolute raw residual
  double mspr;  // mean squared Pearson residual
};

AdequacyStats adequacy_stats(const std::vector<int>& counts,
                             const std::vector<double>& fitted_mu,
                             const std::vector<double>& pearson);

// rho_hat_1..rho_hat_max_lag with the 1/T covariance divisor.
std::vector<double> sample_acf(const std::vector<double>& x, int max_lag);

// Partial autocorrelations via the Durbin-Levinson recursion on sample_acf.
std::vector<double> sample_pacf(const std::vector<double>& x, int max_lag);

struct DiagnosticsReport {
  double residual_mean = 0.0;
  double residual_sd = 0.0;
  double mar = 0.0;
  double mspr = 0.0;
  std::vector<double> residual_acf;
  double max_abs_acf = 0.0;
};

// Pearson-residual diagnostics of a fitted model on a series.
DiagnosticsReport diagnose(const std::vector<int>& counts, const ThetaParams& theta,
                           const DispersionMoments& vt, const ModelSpec& spec,
                           int acf_lags, double variance_floor);

}  // namespace mvj
