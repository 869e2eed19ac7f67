#include "mvj/select.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace {

int criterion_dim(int p1, int p2) { return 3 + p1 + p2; }

void check_criterion_args(double ssr, int T, int p1, int p2, const char* where) {
  if (p1 < 1 || p2 < 0)
    throw std::invalid_argument(std::string(where) + ": invalid order");
  if (ssr < 0.0 || !std::isfinite(ssr))
    throw std::invalid_argument(std::string(where) + ": ssr must be finite and >= 0");
  if (T - std::max(p1, p2) - 1 < 1)
    throw std::invalid_argument(std::string(where) + ": sample too short for the order");
}

}  // namespace

namespace mvj {

double aic(double ssr, int T, int p1, int p2) {
  check_criterion_args(ssr, T, p1, p2, "aic");
  if (ssr == 0.0) return -std::numeric_limits<double>::infinity();
  return T * std::log(ssr / T) + 2.0 * criterion_dim(p1, p2);
}

double bic(double ssr, int T, int p1, int p2) {
  check_criterion_args(ssr, T, p1, p2, "bic");
  if (ssr == 0.0) return -std::numeric_limits<double>::infinity();
  return T * std::log(ssr / T) +
         std::log(static_cast<double>(T - std::max(p1, p2) - 1)) * criterion_dim(p1, p2);
}

std::pair<int, int> pick_order(const std::vector<CriterionCell>& table, bool use_bic) {
  const CriterionCell* best = nullptr;
  for (const CriterionCell& cell : table) {
    if (!cell.ok) continue;
    const double value = use_bic ? cell.bic : cell.aic;
    if (std::isnan(value)) continue;
    if (!best) {
      best = &cell;
      continue;
    }
    const double best_value = use_bic ? best->bic : best->aic;
    if (value < best_value ||
        (value == best_value &&
         (cell.p1 + cell.p2 < best->p1 + best->p2 ||
          (cell.p1 + cell.p2 == best->p1 + best->p2 && cell.p1 < best->p1)))) {
      best = &cell;
    }
  }
  if (!best) throw std::runtime_error("pick_order: no successful fit in the table");
  return {best->p1, best->p2};
}

SelectionResult select_order(const std::vector<int>& counts, const OrderGrid& grid,
                             const ModelSpec& base, const FitConfig& cfg) {
  if (grid.p1_max < 1 || grid.p2_max < 0)
    throw std::invalid_argument("select_order: invalid grid");
  SelectionResult out;
  for (int p1 = 1; p1 <= grid.p1_max; ++p1) {
    for (int p2 = 0; p2 <= grid.p2_max; ++p2) {
      CriterionCell cell;
      cell.p1 = p1;
      cell.p2 = p2;
      try {
        const ModelSpec spec(p1, p2, base.d, base.sigma, base.offset_a);
        const FitResult fit = ols_fit(counts, spec, cfg);
        cell.aic = fit.aic;
        cell.bic = fit.bic;
        cell.ssr = fit.ssr;
        cell.ok = true;
      } catch (const std::exception& e) {
        cell.ok = false;
        cell.error = e.what();
        cell.aic = cell.bic = std::numeric_limits<double>::quiet_NaN();
      }
      out.table.push_back(std::move(cell));
    }
  }
  out.aic_choice = pick_order(out.table, false);
  out.bic_choice = pick_order(out.table, true);
  return out;
}

std::vector<double> pearson_residuals(const std::vector<int>& counts,
                                      const ThetaParams& theta,
                                      const DispersionMoments& vt,
                                      const ModelSpec& spec, double variance_floor) {
  if (!(variance_floor > 0.0))
    throw std::invalid_argument("pearson_residuals: variance floor must be > 0");
  const std::vector<double> mu = mu_recursion(counts, theta, spec);
  const int T = static_cast<int>(counts.size());
  std::vector<double> out(T);
  for (int t = 0; t < T; ++t) {
    const double hvar = conditional_variance(BoundedMean(mu[t], spec.d), vt);
    out[t] = (counts[t] - mu[t]) / std::sqrt(std::max(hvar, variance_floor));
  }
  return out;
}

AdequacyStats adequacy_stats(const std::vector<int>& counts,
                             const std::vector<double>& fitted_mu,
                             const std::vector<double>& pearson) {
  const std::size_t T = counts.size();
  if (T == 0 || fitted_mu.size() != T || pearson.size() != T)
    throw std::invalid_argument("adequacy_stats: length mismatch");
  double mar = 0.0, mspr = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    mar += std::abs(counts[t] - fitted_mu[t]);
    mspr += pearson[t] * pearson[t];
  }
  return {mar / T, mspr / T};
}

std::vector<double> sample_acf(const std::vector<double>& x, int max_lag) {
  const int T = static_cast<int>(x.size());
  if (max_lag < 1) throw std::invalid_argument("sample_acf: max_lag must be >= 1");
  if (max_lag >= T) throw std::invalid_argument("sample_acf: max_lag must be < series length");
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= T;
  double gamma0 = 0.0;
  for (double v : x) gamma0 += (v - mean) * (v - mean);
  gamma0 /= T;
  if (gamma0 == 0.0)
    throw std::domain_error("sample_acf: series has zero variance");
  std::vector<double> rho(max_lag);
  for (int k = 1; k <= max_lag; ++k) {
    double acc = 0.0;
    for (int t = 0; t + k < T; ++t) acc += (x[t] - mean) * (x[t + k] - mean);
    rho[k - 1] = acc / T / gamma0;
  }
  return rho;
}

std::vector<double> sample_pacf(const std::vector<double>& x, int max_lag) {
  const std::vector<double> rho = sample_acf(x, max_lag);
  std::vector<double> pacf(max_lag);
  std::vector<double> prev(max_lag + 1, 0.0), cur(max_lag + 1, 0.0);
  pacf[0] = rho[0];
  prev[1] = rho[0];
  for (int k = 2; k <= max_lag; ++k) {
    double num = rho[k - 1];
    double den = 1.0;
    for (int j = 1; j < k; ++j) {
      num -= prev[j] * rho[k - 1 - j];
      den -= prev[j] * rho[j - 1];
    }
    if (std::abs(den) < 1e-14)
      throw std::runtime_error("sample_pacf: Durbin-Levinson recursion broke down");
    const double phi_kk = num / den;
    for (int j = 1; j < k; ++j) cur[j] = prev[j] - phi_kk * prev[k - j];
    cur[k] = phi_kk;
    prev = cur;
    pacf[k - 1] = phi_kk;
  }
  return pacf;
}

DiagnosticsReport diagnose(const std::vector<int>& counts, const ThetaParams& theta,
                           const DispersionMoments& vt, const ModelSpec& spec,
                           int acf_lags, double variance_floor) {
  const std::vector<double> mu = mu_recursion(counts, theta, spec);
  const std::vector<double> pr = pearson_residuals(counts, theta, vt, spec, variance_floor);
  const int T = static_cast<int>(counts.size());

  DiagnosticsReport rep;
  double mean = 0.0;
  for (double v : pr) mean += v;
  mean /= T;
  double ss = 0.0;
  for (double v : pr) ss += (v - mean) * (v - mean);
  rep.residual_mean = mean;
  rep.residual_sd = T > 1 ? std::sqrt(ss / (T - 1)) : 0.0;

  const AdequacyStats stats = adequacy_stats(counts, mu, pr);
  rep.mar = stats.mar;
  rep.mspr = stats.mspr;

  if (acf_lags >= 1 && acf_lags < T) {
    rep.residual_acf = sample_acf(pr, acf_lags);
    for (double v : rep.residual_acf)
      rep.max_abs_acf = std::max(rep.max_abs_acf, std::abs(v));
  }
  return rep;
}

}  // namespace mvj
