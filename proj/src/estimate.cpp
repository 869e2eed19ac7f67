#include "mvj/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "mvj/select.hpp"

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using mvj::ModelSpec;
using mvj::ThetaParams;

void require_counts(const std::vector<int>& counts, const ModelSpec& spec,
                    const char* where) {
  const int T = static_cast<int>(counts.size());
  const int p = std::max(spec.p1, spec.p2);
  if (T < spec.n_params() || T < p + 2)
    throw std::invalid_argument(std::string(where) + ": series too short for the model order");
  for (int t = 0; t < T; ++t) {
    if (counts[t] < 0 || counts[t] > spec.d) {
      std::ostringstream msg;
      msg << where << ": observation " << (t + 1) << " = " << counts[t]
          << " outside {0, ..., " << spec.d << "}";
      throw std::invalid_argument(msg.str());
    }
  }
}

// Objective and analytic gradient of the (optionally weighted) squared-error
// criterion in a single forward pass. The recursion carries a ring of the
// last p2 fitted means and gradient rows; presample values are zero.
class SquaredErrorObjective {
 public:
  SquaredErrorObjective(const std::vector<int>& counts, const ModelSpec& spec,
                        const std::vector<double>* weights)
      : counts_(counts), spec_(spec), weights_(weights), link_(spec.link()) {}

  // Returns f(x); fills grad when non-null. x is the flat (c, phi, psi).
  double eval(const VectorXd& x, VectorXd* grad) const {
    const int T = static_cast<int>(counts_.size());
    const int p1 = spec_.p1, p2 = spec_.p2;
    const int P = spec_.n_params();
    double f = 0.0;
    if (grad) grad->setZero(P);

    std::vector<double> mu_ring(std::max(p2, 1), 0.0);
    MatrixXd grad_ring = MatrixXd::Zero(std::max(p2, 1), P);
    VectorXd g(P), dmu(P);

    for (int t = 0; t < T; ++t) {
      double xi = x[0];
      for (int i = 1; i <= p1; ++i)
        xi += x[i] * (t - i >= 0 ? counts_[t - i] : 0);
      for (int j = 1; j <= p2; ++j)
        xi += x[p1 + j] * (t - j >= 0 ? mu_ring[(t - j) % p2] : 0.0);

      const double mu = mvj::clipped_laplace(xi, link_);
      const double res = counts_[t] - mu;
      const double w = weights_ ? (*weights_)[t] : 1.0;
      f += w * res * res;

      if (grad) {
        g.setZero();
        g[0] = 1.0;
        for (int i = 1; i <= p1; ++i) g[i] = t - i >= 0 ? counts_[t - i] : 0.0;
        // Direct psi entries first: the recursive terms below touch every
        // coordinate, so interleaving would clobber them.
        for (int j = 1; j <= p2; ++j)
          if (t - j >= 0) g[p1 + j] = mu_ring[(t - j) % p2];
        for (int j = 1; j <= p2; ++j)
          if (t - j >= 0) g += x[p1 + j] * grad_ring.row((t - j) % p2).transpose();
        dmu = mvj::clipped_laplace_deriv(xi, link_) * g;
        grad->noalias() += (-2.0 * w * res) * dmu;
        if (p2 > 0) grad_ring.row(t % p2) = dmu.transpose();
      }
      if (p2 > 0) mu_ring[t % p2] = mu;
    }
    return f;
  }

 private:
  const std::vector<int>& counts_;
  const ModelSpec& spec_;
  const std::vector<double>* weights_;
  mvj::LinkSpec link_;
};

// Euclidean projection of v onto the l1 ball of the given radius.
void project_l1_ball(VectorXd& v, double radius) {
  const int n = static_cast<int>(v.size());
  double abs_sum = 0.0;
  for (int i = 0; i < n; ++i) abs_sum += std::abs(v[i]);
  if (abs_sum <= radius) return;
  std::vector<double> u(n);
  for (int i = 0; i < n; ++i) u[i] = std::abs(v[i]);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cum = 0.0, tau = 0.0;
  for (int k = 0; k < n; ++k) {
    cum += u[k];
    const double t = (cum - radius) / (k + 1);
    if (k == n - 1 || u[k + 1] <= t) {
      tau = t;
      break;
    }
  }
  for (int i = 0; i < n; ++i) {
    const double m = std::abs(v[i]) - tau;
    v[i] = m > 0.0 ? (v[i] > 0.0 ? m : -m) : 0.0;
  }
}

// Project the full parameter vector: intercept free, coefficients inside the
// l1 ball of radius `radius`.
VectorXd project_params(VectorXd x, double radius) {
  VectorXd coef = x.tail(x.size() - 1);
  project_l1_ball(coef, radius);
  x.tail(x.size() - 1) = coef;
  return x;
}

struct StartOutcome {
  VectorXd x;
  double f = std::numeric_limits<double>::infinity();
  bool converged = false;
  int iterations = 0;
  double grad_norm = 0.0;
};

// Projected BFGS with Armijo backtracking. The feasible set (box-free
// intercept, coefficient l1 ball) is convex, so every trial point is the
// projection of a line-search step.
StartOutcome minimize_from(const SquaredErrorObjective& obj, VectorXd x0,
                           double radius, const mvj::FitConfig& cfg) {
  const int P = static_cast<int>(x0.size());
  StartOutcome out;
  VectorXd x = project_params(std::move(x0), radius);
  VectorXd g(P), g_new(P);
  double f = obj.eval(x, &g);
  MatrixXd H = MatrixXd::Identity(P, P);

  int iter = 0;
  for (; iter < cfg.max_iterations; ++iter) {
    const VectorXd pg = x - project_params(x - g, radius);
    out.grad_norm = pg.norm();
    if (out.grad_norm <= cfg.gradient_tol * std::max(1.0, std::abs(f))) {
      out.converged = true;
      break;
    }

    VectorXd dir = -(H * g);
    if (dir.dot(g) > -1e-14 * dir.norm() * g.norm()) {
      dir = -g;  // quasi-Newton direction lost descent; fall back
      H.setIdentity();
    }

    double alpha = 1.0;
    VectorXd x_trial;
    double f_trial = f;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      x_trial = project_params(x + alpha * dir, radius);
      const VectorXd step = x_trial - x;
      if (step.norm() <= cfg.step_tol * std::max(1.0, x.norm())) break;
      f_trial = obj.eval(x_trial, nullptr);
      if (f_trial <= f + 1e-4 * g.dot(step)) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      // No progress along this direction; declare convergence only if the
      // projected gradient is already small.
      out.converged = out.grad_norm <= 1e3 * cfg.gradient_tol * std::max(1.0, std::abs(f));
      break;
    }

    f_trial = obj.eval(x_trial, &g_new);
    const VectorXd s = x_trial - x;
    const VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-10 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const MatrixXd I = MatrixXd::Identity(P, P);
      H = (I - rho * s * y.transpose()) * H * (I - rho * y * s.transpose()) +
          rho * s * s.transpose();
    }
    x = x_trial;
    f = f_trial;
    g = g_new;
  }
  out.x = x;
  out.f = f;
  out.iterations = iter;
  return out;
}

// Deterministic multistart grid: total signed coefficient mass q spread
// evenly across the lags, intercept matched to the sample mean through the
// linear mid-section of the link.
std::vector<VectorXd> build_starts(const std::vector<int>& counts, const ModelSpec& spec,
                                   int n_starts, double radius) {
  static const double kMass[8] = {0.2, 0.45, 0.7, 0.9, -0.3, -0.6, -0.85, 0.0};
  const int P = spec.n_params();
  const int n_coef = P - 1;
  double dbar = std::accumulate(counts.begin(), counts.end(), 0.0) /
                static_cast<double>(counts.size());
  dbar = std::min(std::max(dbar, 0.05 * spec.d), 0.95 * spec.d);
  const double s = mvj::scale_factor(spec.link());
  const double xi_bar = (dbar - 0.5 * spec.d * (1.0 - s)) / s;

  std::vector<VectorXd> starts;
  for (int k = 0; k < n_starts; ++k) {
    const double q = std::min(std::max(kMass[k], -radius + 1e-6), radius - 1e-6);
    VectorXd x(P);
    x[0] = xi_bar - q * dbar;
    for (int i = 1; i < P; ++i) x[i] = q / n_coef;
    starts.push_back(std::move(x));
  }
  return starts;
}

constexpr double kDegenerateSsrPerObs = 1e-12;

}  // namespace

namespace mvj {

void FitConfig::validate() const {
  if (multistarts < 1 || multistarts > 8)
    throw std::invalid_argument("FitConfig: multistarts must lie in 1..8");
  if (max_iterations < 1) throw std::invalid_argument("FitConfig: max_iterations must be >= 1");
  if (!(gradient_tol > 0.0)) throw std::invalid_argument("FitConfig: gradient_tol must be > 0");
  if (!(step_tol > 0.0)) throw std::invalid_argument("FitConfig: step_tol must be > 0");
  if (!(box_margin > 0.0 && box_margin < 1.0))
    throw std::invalid_argument("FitConfig: box_margin must lie in (0, 1)");
  if (!(variance_floor > 0.0))
    throw std::invalid_argument("FitConfig: variance_floor must be > 0");
}

std::vector<double> mu_recursion(const std::vector<int>& counts, const ThetaParams& theta,
                                 const ModelSpec& spec) {
  if (theta.p1() != spec.p1 || theta.p2() != spec.p2)
    throw std::invalid_argument("mu_recursion: theta orders do not match the model spec");
  require_counts(counts, spec, "mu_recursion");
  const LinkSpec link = spec.link();
  const int T = static_cast<int>(counts.size());
  std::vector<double> mu(T, 0.0);
  for (int t = 0; t < T; ++t) {
    double xi = theta.c;
    for (int i = 1; i <= spec.p1; ++i)
      xi += theta.phi[i - 1] * (t - i >= 0 ? counts[t - i] : 0);
    for (int j = 1; j <= spec.p2; ++j)
      xi += theta.psi[j - 1] * (t - j >= 0 ? mu[t - j] : 0.0);
    mu[t] = clipped_laplace(xi, link);
  }
  return mu;
}

double next_xi(const std::vector<int>& counts, const std::vector<double>& mu_tilde,
               const ThetaParams& theta, const ModelSpec& spec) {
  if (counts.size() != mu_tilde.size())
    throw std::invalid_argument("next_xi: counts and fitted means differ in length");
  const int T = static_cast<int>(counts.size());
  double xi = theta.c;
  for (int i = 1; i <= spec.p1; ++i)
    xi += theta.phi[i - 1] * (T - i >= 0 ? counts[T - i] : 0);
  for (int j = 1; j <= spec.p2; ++j)
    xi += theta.psi[j - 1] * (T - j >= 0 ? mu_tilde[T - j] : 0.0);
  return xi;
}

Eigen::MatrixXd mu_gradient(const std::vector<int>& counts, const ThetaParams& theta,
                            const ModelSpec& spec, std::vector<double>* mu_out) {
  if (theta.p1() != spec.p1 || theta.p2() != spec.p2)
    throw std::invalid_argument("mu_gradient: theta orders do not match the model spec");
  require_counts(counts, spec, "mu_gradient");
  const LinkSpec link = spec.link();
  const int T = static_cast<int>(counts.size());
  const int p1 = spec.p1, p2 = spec.p2, P = spec.n_params();
  MatrixXd J(T, P);
  std::vector<double> mu(T, 0.0);
  VectorXd g(P);
  for (int t = 0; t < T; ++t) {
    double xi = theta.c;
    for (int i = 1; i <= p1; ++i) xi += theta.phi[i - 1] * (t - i >= 0 ? counts[t - i] : 0);
    for (int j = 1; j <= p2; ++j) xi += theta.psi[j - 1] * (t - j >= 0 ? mu[t - j] : 0.0);
    mu[t] = clipped_laplace(xi, link);

    g.setZero();
    g[0] = 1.0;
    for (int i = 1; i <= p1; ++i) g[i] = t - i >= 0 ? counts[t - i] : 0.0;
    // Direct psi entries before the recursive accumulation; see eval().
    for (int j = 1; j <= p2; ++j)
      if (t - j >= 0) g[p1 + j] = mu[t - j];
    for (int j = 1; j <= p2; ++j)
      if (t - j >= 0) g += theta.psi[j - 1] * J.row(t - j).transpose();
    J.row(t) = (clipped_laplace_deriv(xi, link) * g).transpose();
  }
  if (mu_out) *mu_out = std::move(mu);
  return J;
}

std::pair<double, double> project_dispersion(double t1, double t2) {
  if (!std::isfinite(t1) || !std::isfinite(t2))
    throw std::invalid_argument("project_dispersion: non-finite input");
  // Inside (boundary included): return unchanged, so the map is idempotent.
  if (t1 >= 0.0 && t1 <= 1.0 && t2 <= t1 && t2 >= t1 * t1) return {t1, t2};

  double best_x = 0.0, best_y = 0.0;
  double best_dist = std::numeric_limits<double>::infinity();
  auto consider = [&](double x, double y) {
    const double dx = x - t1, dy = y - t2;
    const double dist = dx * dx + dy * dy;
    if (dist < best_dist) {
      best_dist = dist;
      best_x = x;
      best_y = y;
    }
  };

  // Candidate 1: the segment y = x, x in [0, 1].
  {
    const double t = std::min(std::max(0.5 * (t1 + t2), 0.0), 1.0);
    consider(t, t);
  }
  // Candidate 2: the parabola y = x^2, x in [0, 1]. Stationarity of the
  // squared distance gives 2x^3 + (1 - 2 t2) x - t1 = 0, monotone increasing
  // in x when 1 - 2 t2 >= 0 and still single-rooted on [0, 1] otherwise for
  // points below the arc; bisect and keep the endpoints as fallbacks.
  {
    auto h = [&](double x) { return 2.0 * x * x * x + (1.0 - 2.0 * t2) * x - t1; };
    double lo = 0.0, hi = 1.0;
    if (h(lo) <= 0.0 && h(hi) >= 0.0) {
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (h(mid) < 0.0 ? lo : hi) = mid;
      }
      const double x = 0.5 * (lo + hi);
      consider(x, x * x);
    }
    consider(0.0, 0.0);
    consider(1.0, 1.0);
  }

  // Snap exactly into the region so downstream validation never sees a
  // last-place violation.
  double x = std::min(std::max(best_x, 0.0), 1.0);
  double y = std::min(std::max(best_y, x * x), x);
  return {x, y};
}

VarthetaFit vartheta_fit(const std::vector<int>& counts,
                         const std::vector<double>& fitted_mu, int d) {
  const int T = static_cast<int>(counts.size());
  if (T == 0 || fitted_mu.size() != counts.size())
    throw std::invalid_argument("vartheta_fit: counts and fitted means differ in length");

  Eigen::Matrix2d A = Eigen::Matrix2d::Zero();
  Eigen::Vector2d b = Eigen::Vector2d::Zero();
  std::vector<Eigen::Vector2d> V(T);
  std::vector<double> y(T);
  for (int t = 0; t < T; ++t) {
    const BoundedMean m(fitted_mu[t], d);
    const VarianceComponents vc = variance_components(m);
    const double res = counts[t] - fitted_mu[t];
    V[t] = Eigen::Vector2d(vc.v1, vc.v2);
    y[t] = res * res - variance_lower(fitted_mu[t]);
    A += V[t] * V[t].transpose();
    b += V[t] * y[t];
  }

  VarthetaFit out;
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(A);
  const double lmax = es.eigenvalues()(1);
  const double lmin = es.eigenvalues()(0);
  if (!(lmax > 0.0)) {
    out.reduced_rank = true;
    out.warnings.push_back("dispersion design is zero; vartheta not identified");
    out.raw.setZero();
    out.projected = DispersionMoments(0.0, 0.0);
    return out;
  }
  if (lmin <= 1e-12 * lmax) {
    // Means never leave the first cell (V2 = 0 throughout) or similar
    // collinearity: fit vartheta1 alone, tie vartheta2 to the degenerate
    // (constant-r) boundary.
    out.reduced_rank = true;
    out.warnings.push_back(
        "dispersion design is rank deficient; vartheta2 set by projection");
    double s11 = 0.0, s1y = 0.0;
    for (int t = 0; t < T; ++t) {
      s11 += V[t](0) * V[t](0);
      s1y += V[t](0) * y[t];
    }
    const double t1_raw = s11 > 0.0 ? s1y / s11 : 0.0;
    out.raw = Eigen::Vector2d(t1_raw, 0.0);
    const double t1 = std::min(std::max(t1_raw, 0.0), 1.0);
    const auto [px, py] = project_dispersion(t1, t1 * t1);
    out.projected = DispersionMoments(px, py);
    double hvar = 0.0;
    for (int t = 0; t < T; ++t) {
      const double eta = y[t] - t1_raw * V[t](0);
      hvar += V[t](0) * eta * eta * V[t](0);
    }
    out.cov.setZero();
    if (s11 > 0.0) out.cov(0, 0) = hvar / (s11 * s11);
    return out;
  }

  out.raw = A.ldlt().solve(b);
  const auto [px, py] = project_dispersion(out.raw(0), out.raw(1));
  out.projected = DispersionMoments(px, py);

  // Heteroskedasticity-robust covariance at the raw least-squares solution.
  Eigen::Matrix2d meat = Eigen::Matrix2d::Zero();
  for (int t = 0; t < T; ++t) {
    const double eta = y[t] - out.raw.dot(V[t]);
    meat += (eta * eta) * V[t] * V[t].transpose();
  }
  const Eigen::Matrix2d Ainv = A.inverse();
  out.cov = Ainv * meat * Ainv;
  return out;
}

Eigen::Vector2d vartheta_bootstrap_sd(const std::vector<int>& counts,
                                      const std::vector<double>& fitted_mu, int d,
                                      int n_resamples, std::uint64_t seed) {
  const int T = static_cast<int>(counts.size());
  if (T < 4 || fitted_mu.size() != counts.size())
    throw std::invalid_argument("vartheta_bootstrap_sd: series too short");
  if (n_resamples < 2)
    throw std::invalid_argument("vartheta_bootstrap_sd: need at least 2 resamples");

  const int block = static_cast<int>(std::ceil(std::cbrt(static_cast<double>(T))));
  const int n_blocks = (T + block - 1) / block;
  Philox rng(seed, 0);

  std::vector<int> c_res(T);
  std::vector<double> m_res(T);
  Eigen::Vector2d sum = Eigen::Vector2d::Zero(), sumsq = Eigen::Vector2d::Zero();
  for (int b = 0; b < n_resamples; ++b) {
    int filled = 0;
    for (int k = 0; k < n_blocks && filled < T; ++k) {
      const int start = static_cast<int>(rng.next_double() * (T - block + 1));
      for (int j = 0; j < block && filled < T; ++j, ++filled) {
        c_res[filled] = counts[start + j];
        m_res[filled] = fitted_mu[start + j];
      }
    }
    const VarthetaFit fit = vartheta_fit(c_res, m_res, d);
    const Eigen::Vector2d est(fit.projected.vartheta1, fit.projected.vartheta2);
    sum += est;
    sumsq += est.cwiseProduct(est);
  }
  const double n = static_cast<double>(n_resamples);
  const Eigen::Vector2d mean = sum / n;
  Eigen::Vector2d var = (sumsq - n * mean.cwiseProduct(mean)) / (n - 1.0);
  var = var.cwiseMax(0.0);
  return var.cwiseSqrt();
}

CovMatrices covariance_matrices(const std::vector<int>& counts, const ThetaParams& theta,
                                const DispersionMoments& vt,
                                const std::vector<double>& weights,
                                const ModelSpec& spec, double variance_floor) {
  require_counts(counts, spec, "covariance_matrices");
  const int T = static_cast<int>(counts.size());
  if (static_cast<int>(weights.size()) != T)
    throw std::invalid_argument("covariance_matrices: weights length mismatch");
  const int P = spec.n_params();

  std::vector<double> mu;
  const MatrixXd J = mu_gradient(counts, theta, spec, &mu);

  CovMatrices out;
  out.k1 = MatrixXd::Zero(P, P);
  out.gamma1 = MatrixXd::Zero(P, P);
  out.sigma_inv = MatrixXd::Zero(P, P);
  for (int t = 0; t < T; ++t) {
    const VectorXd row = J.row(t).transpose();
    const MatrixXd outer = row * row.transpose();
    const double res = counts[t] - mu[t];
    const double w = weights[t];
    out.k1 += w * outer;
    out.gamma1 += w * w * res * res * outer;
    const double hvar = conditional_variance(BoundedMean(mu[t], spec.d), vt);
    out.sigma_inv += outer / std::max(hvar, variance_floor);
  }
  out.k1 /= T;
  out.gamma1 /= T;
  out.sigma_inv /= T;

  const Eigen::SelfAdjointEigenSolver<MatrixXd> es(out.k1);
  const double lmax = es.eigenvalues()(P - 1);
  const double lmin = es.eigenvalues()(0);
  if (!(lmax > 0.0) || lmin <= 1e-12 * lmax) {
    std::ostringstream msg;
    msg << "covariance_matrices: singular normal matrix; degenerate direction (";
    for (int i = 0; i < P; ++i) msg << (i ? ", " : "") << es.eigenvectors().col(0)(i);
    msg << ")";
    throw std::runtime_error(msg.str());
  }
  out.k1_condition = lmax / lmin;
  if (out.k1_condition > 1e8) {
    std::ostringstream msg;
    msg << "normal matrix ill-conditioned (condition number " << out.k1_condition << ")";
    out.warnings.push_back(msg.str());
  }
  const MatrixXd k1_inv = out.k1.inverse();
  out.sandwich = k1_inv * out.gamma1 * k1_inv / T;
  return out;
}

namespace {

// Shared tail of all three fits: run the multistart search, evaluate the
// winning point, and attach dispersion and covariance estimates.
FitResult fit_core(const std::vector<int>& counts, const ModelSpec& spec,
                   const std::vector<double>* weights, const FitConfig& cfg,
                   const char* method, const VectorXd* extra_start) {
  cfg.validate();
  require_counts(counts, spec, method);
  if (weights) {
    if (weights->size() != counts.size())
      throw std::invalid_argument(std::string(method) + ": weights length mismatch");
    for (double w : *weights)
      if (!(w > 0.0) || !std::isfinite(w))
        throw std::invalid_argument(std::string(method) +
                                    ": weights must be finite and strictly positive");
  }

  const int T = static_cast<int>(counts.size());
  const double radius = 1.0 - cfg.box_margin;
  const SquaredErrorObjective obj(counts, spec, weights);

  std::vector<VectorXd> starts = build_starts(counts, spec, cfg.multistarts, radius);
  if (extra_start) starts.push_back(*extra_start);

  FitResult result(spec);
  result.method = method;
  StartOutcome best;
  bool have_best = false;
  for (const VectorXd& s : starts) {
    StartOutcome o = minimize_from(obj, s, radius, cfg);
    result.multistart_objectives.push_back(o.f);
    const double tol = 1e-12 * std::max(1.0, std::abs(best.f));
    const bool better =
        !have_best || o.f < best.f - tol ||
        (std::abs(o.f - best.f) <= tol && o.x.norm() < best.x.norm());
    if (better) {
      best = std::move(o);
      have_best = true;
    }
  }

  result.theta = ThetaParams::from_flat(
      std::vector<double>(best.x.data(), best.x.data() + best.x.size()), spec.p1, spec.p2);
  result.converged = best.converged;
  result.iterations = best.iterations;
  result.grad_norm = best.grad_norm;
  result.objective = best.f;

  result.fitted_mu = mu_recursion(counts, result.theta, spec);
  result.residuals.resize(T);
  double ssr = 0.0;
  for (int t = 0; t < T; ++t) {
    result.residuals[t] = counts[t] - result.fitted_mu[t];
    ssr += result.residuals[t] * result.residuals[t];
  }
  result.ssr = ssr;
  result.aic = aic(ssr, T, spec.p1, spec.p2);
  result.bic = bic(ssr, T, spec.p1, spec.p2);

  if (ssr <= kDegenerateSsrPerObs * T) {
    // A numerically perfect fit leaves no residual information: flag it and
    // skip the dispersion / covariance stage instead of inverting noise.
    result.warnings.push_back(
        "degenerate fit: residuals numerically zero, parameters not identified "
        "from this series; covariance unavailable");
    result.cov_theta = MatrixXd::Zero(spec.n_params(), spec.n_params());
    return result;
  }

  VarthetaFit vfit = vartheta_fit(counts, result.fitted_mu, spec.d);
  result.vartheta_raw = vfit.raw;
  result.vartheta = vfit.projected;
  result.cov_vartheta = vfit.cov;
  for (const std::string& w : vfit.warnings) result.warnings.push_back(w);

  const std::vector<double> unit(counts.size(), 1.0);
  const std::vector<double>& w_used = weights ? *weights : unit;
  CovMatrices cov = covariance_matrices(counts, result.theta, result.vartheta, w_used,
                                        spec, cfg.variance_floor);
  for (const std::string& w : cov.warnings) result.warnings.push_back(w);
  result.cov_theta = cov.sandwich;
  return result;
}

}  // namespace

FitResult ols_fit(const std::vector<int>& counts, const ModelSpec& spec,
                  const FitConfig& cfg) {
  return fit_core(counts, spec, nullptr, cfg, "ols", nullptr);
}

FitResult wls_fit(const std::vector<int>& counts, const ModelSpec& spec,
                  const std::vector<double>& weights, const FitConfig& cfg) {
  return fit_core(counts, spec, &weights, cfg, "wls", nullptr);
}

FitResult owls_fit(const std::vector<int>& counts, const ModelSpec& spec,
                   const FitConfig& cfg) {
  FitResult stage1 = ols_fit(counts, spec, cfg);
  if (!stage1.warnings.empty() && stage1.ssr <= kDegenerateSsrPerObs * counts.size()) {
    stage1.method = "owls";
    stage1.warnings.push_back("optimal weights unavailable; returning unweighted fit");
    return stage1;
  }

  // Weights fixed from the first stage: 1 / max(R(mu) + h(mu), floor).
  const int T = static_cast<int>(counts.size());
  std::vector<double> w(T);
  int floor_hits = 0;
  for (int t = 0; t < T; ++t) {
    const double hvar = conditional_variance(BoundedMean(stage1.fitted_mu[t], spec.d),
                                             stage1.vartheta);
    w[t] = 1.0 / std::max(hvar, cfg.variance_floor);
    if (hvar < cfg.variance_floor) ++floor_hits;
  }

  const VectorXd warm = Eigen::Map<const VectorXd>(stage1.theta.flat().data(),
                                                   spec.n_params());
  FitResult result = fit_core(counts, spec, &w, cfg, "owls", &warm);
  if (floor_hits > 0) {
    std::ostringstream msg;
    msg << "optimal-weight floor engaged on " << floor_hits << " of " << T
        << " observations";
    result.warnings.push_back(msg.str());
  }

  // Report the asymptotic covariance through the optimal-weight information
  // plug-in rather than the generic sandwich.
  CovMatrices cov = covariance_matrices(counts, result.theta, result.vartheta, w, spec,
                                        cfg.variance_floor);
  result.cov_theta = cov.sigma_inv.inverse() / T;
  return result;
}

}  // namespace mvj
