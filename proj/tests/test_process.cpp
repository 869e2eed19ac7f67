#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mvj/process.hpp"
#include "mvj/select.hpp"

using namespace mvj;

TEST_CASE("parameter regions") {
  const ThetaParams in0(-0.2, {0.5}, {});
  CHECK(in0.in_theta0());
  CHECK_FALSE(in0.in_theta1());  // negative intercept
  const ThetaParams in1(0.1, {0.3}, {0.4});
  CHECK(in1.in_theta0());
  CHECK(in1.in_theta1());
  const ThetaParams out0(0.0, {0.7}, {0.4});  // coefficient mass 1.1
  CHECK_FALSE(out0.in_theta0());
  CHECK_FALSE(out0.in_theta1());
  const ThetaParams border(0.2, {0.5}, {0.3});  // c + sum = 1 exactly
  CHECK(border.in_theta0());
  CHECK_FALSE(border.in_theta1());
  const ThetaParams neg(0.1, {-0.3}, {0.4});
  CHECK(neg.in_theta0());
  CHECK_FALSE(neg.in_theta1());
}

TEST_CASE("stationarity screen on reference points") {
  const ModelSpec spec10(1, 0, 15, 1.0);
  {
    const StationarityReport rep = check_stationarity(ThetaParams(-0.2, {0.5}, {}), spec10);
    CHECK(rep.psi_poly_ok);
    CHECK(rep.phi_star_ok);
    CHECK(rep.theta0_member);
    CHECK(rep.stationary());
    CHECK_FALSE(rep.theta1_member);  // c < 0
  }
  {
    // Unit root in the count polynomial.
    const StationarityReport rep = check_stationarity(ThetaParams(0.0, {1.0}, {}), spec10);
    CHECK_FALSE(rep.phi_star_ok);
    CHECK_FALSE(rep.stationary());
  }
  {
    const ModelSpec spec11(1, 1, 15, 1.0);
    const StationarityReport rep =
        check_stationarity(ThetaParams(0.0, {0.4}, {1.05}), spec11);
    CHECK_FALSE(rep.psi_poly_ok);
    // Negative coefficients never enter the positive-part polynomial.
    const StationarityReport rep2 =
        check_stationarity(ThetaParams(5.0, {-0.9}, {-0.9}), spec11);
    CHECK(rep2.psi_poly_ok);   // |psi| < 1 via the root check
    CHECK(rep2.phi_star_ok);   // positive parts are all zero
  }
  {
    // Second-order borderline: phi = (0.5, 0.5) puts a root at z = 1.
    const ModelSpec spec20(2, 0, 15, 1.0);
    const StationarityReport rep =
        check_stationarity(ThetaParams(0.0, {0.5, 0.5}, {}), spec20);
    CHECK_FALSE(rep.phi_star_ok);
    const StationarityReport rep2 =
        check_stationarity(ThetaParams(0.0, {0.5, 0.49}, {}), spec20);
    CHECK(rep2.phi_star_ok);
  }
}

TEST_CASE("stationary mean: frozen oracle value and fixed-point property") {
  // d=15, sigma=1, theta = (0.5, 0.2, 0.2): s = 0.9153991542829122,
  // c* = 0.5 s + 7.5 (1 - s) = 1.0922059200196146, denominator
  // 1 - 0.4 s = 0.6338403382868352.
  const ModelSpec spec(1, 1, 15, 1.0);
  const ThetaParams theta(0.5, {0.2}, {0.2});
  const double mu = stationary_mean(theta, spec);
  CHECK(mu == doctest::Approx(1.7231562178129356).epsilon(1e-14));
  // Fixed point of the linearized recursion: mu = CL(c + (phi+psi) mu) when
  // the linear predictor stays inside [0, d].
  const double xi = theta.c + (theta.phi[0] + theta.psi[0]) * mu;
  CHECK(xi >= 0.0);
  CHECK(xi <= 15.0);
  CHECK(clipped_laplace(xi, spec.link()) == doctest::Approx(mu).epsilon(1e-12));
}

TEST_CASE("stationary mean rejects non-stationary input") {
  const ModelSpec spec(1, 0, 15, 1.0);
  CHECK_THROWS_AS(stationary_mean(ThetaParams(0.0, {1.2}, {}), spec), std::domain_error);
}

TEST_CASE("moving-average weights: first-order closed form") {
  // For orders (1,1): w_0 = 1, w_k = phi* (phi* + psi*)^{k-1}.
  const ModelSpec spec(1, 1, 15, 1.0);
  const ThetaParams theta(0.1, {0.25}, {0.35});
  const double s = scale_factor(spec.link());
  const double ps = s * 0.25, qs = s * 0.35;
  const std::vector<double> w = pi_weights(theta, spec, 12);
  CHECK(w[0] == 1.0);
  for (int k = 1; k < 12; ++k)
    CHECK(w[k] == doctest::Approx(ps * std::pow(ps + qs, k - 1)).epsilon(1e-12));
}

TEST_CASE("moving-average weights for a pure count lag reduce to powers") {
  const ModelSpec spec(1, 0, 15, 1.0);
  const ThetaParams theta(-0.2, {0.5}, {});
  const double s = scale_factor(spec.link());
  const std::vector<double> w = pi_weights(theta, spec, 10);
  for (int k = 0; k < 10; ++k)
    CHECK(w[k] == doctest::Approx(std::pow(0.5 * s, k)).epsilon(1e-12));
}

TEST_CASE("model autocorrelations: first-order closed form and geometric decay") {
  const ModelSpec spec(1, 0, 15, 1.0);
  const ThetaParams theta(-0.2, {0.5}, {});
  const double a = 0.5 * scale_factor(spec.link());
  const std::vector<double> rho = theoretical_acf(theta, spec, 6);
  // AR(1)-type chain: rho_k = a^k.
  for (int k = 1; k <= 6; ++k)
    CHECK(rho[k - 1] == doctest::Approx(std::pow(a, k)).epsilon(1e-10));
}

TEST_CASE("model autocorrelations are symmetric-invariant under mixed signs") {
  // Negative-feedback chain alternates in sign.
  const ModelSpec spec(1, 0, 15, 1.0);
  const ThetaParams theta(5.0, {-0.5}, {});
  const std::vector<double> rho = theoretical_acf(theta, spec, 4);
  CHECK(rho[0] < 0.0);
  CHECK(rho[1] > 0.0);
  CHECK(rho[2] < 0.0);
  const double a = -0.5 * scale_factor(spec.link());
  for (int k = 1; k <= 4; ++k)
    CHECK(rho[k - 1] == doctest::Approx(std::pow(a, k)).epsilon(1e-10));
}

TEST_CASE("simulation: reproducible, in range, and latent pieces consistent") {
  const ModelSpec spec(1, 1, 15, 1.0);
  const ThetaParams theta(-0.2, {0.4}, {0.4});
  const RDistribution rdist = RDistribution::Beta(1.0, 1.0);
  const SimulatedPath a = simulate_mvj(theta, rdist, spec, 400, 200, 77, 0);
  const SimulatedPath b = simulate_mvj(theta, rdist, spec, 400, 200, 77, 0);
  const SimulatedPath c = simulate_mvj(theta, rdist, spec, 400, 200, 77, 1);
  CHECK(a.counts == b.counts);
  CHECK(a.counts != c.counts);
  CHECK(a.counts.size() == 400);
  int diff = 0;
  for (std::size_t t = 0; t < a.counts.size(); ++t) {
    CHECK(a.counts[t] >= 0);
    CHECK(a.counts[t] <= 15);
    CHECK(a.mu[t] > 0.0);
    CHECK(a.mu[t] < 15.0);
    CHECK(a.r[t] >= 0.0);
    CHECK(a.r[t] <= 1.0);
    // mu is the link image of xi.
    CHECK(a.mu[t] == doctest::Approx(clipped_laplace(a.xi[t], spec.link())).epsilon(1e-14));
    if (t > 0 && a.counts[t] != a.counts[t - 1]) ++diff;
  }
  CHECK(diff > 50);  // the path actually moves
}

TEST_CASE("simulated sample mean approaches the stationary mean") {
  // Nonnegative-region parameters where the linearization is exact as long
  // as xi stays inside [0, d].
  const ModelSpec spec(1, 1, 15, 1.0);
  const ThetaParams theta(0.1, {0.2}, {0.3});
  const RDistribution rdist = RDistribution::Beta(1.0, 1.0);
  const double target = stationary_mean(theta, spec);
  const SimulatedPath path = simulate_mvj(theta, rdist, spec, 200000, 1000, 5, 0);
  const double mean = std::accumulate(path.counts.begin(), path.counts.end(), 0.0) /
                      path.counts.size();
  CHECK(mean == doctest::Approx(target).epsilon(0.02));
}

TEST_CASE("simulated autocorrelations approach the model autocorrelations") {
  const ModelSpec spec(1, 0, 15, 1.0);
  const ThetaParams theta(-0.2, {0.5}, {});
  const RDistribution rdist = RDistribution::Beta(1.0, 1.0);
  const std::vector<double> rho = theoretical_acf(theta, spec, 3);
  const SimulatedPath path = simulate_mvj(theta, rdist, spec, 300000, 1000, 9, 0);
  const std::vector<double> x(path.counts.begin(), path.counts.end());
  const std::vector<double> hat = sample_acf(x, 3);
  for (int k = 0; k < 3; ++k) CHECK(hat[k] == doctest::Approx(rho[k]).epsilon(0.08));
}

TEST_CASE("constant mixing draws are taken verbatim") {
  const ModelSpec spec(1, 0, 15, 1.0);
  const ThetaParams theta(-0.2, {0.5}, {});
  const SimulatedPath path =
      simulate_mvj(theta, RDistribution::Constant(0.25), spec, 50, 10, 3, 0);
  for (double r : path.r) CHECK(r == 0.25);
}

TEST_CASE("two-moment mixing cannot simulate but yields moments") {
  const RDistribution rd = RDistribution::TwoMoment(0.5, 1.0 / 3.0);
  CHECK_FALSE(rd.samplable());
  const DispersionMoments m = rd.moments();
  CHECK(m.vartheta1 == 0.5);
  CHECK(m.vartheta2 == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  const ModelSpec spec(1, 0, 15, 1.0);
  CHECK_THROWS_AS(simulate_mvj(ThetaParams(-0.2, {0.5}, {}), rd, spec, 10, 0, 1, 0),
                  std::invalid_argument);
  // Uniform mixing has the reference moment pair.
  const DispersionMoments beta = RDistribution::Beta(1.0, 1.0).moments();
  CHECK(beta.vartheta1 == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(beta.vartheta2 == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("one-step forecast matches the fitted recursion by hand") {
  const ModelSpec spec(1, 1, 15, 1.0);
  const ThetaParams theta(0.3, {0.2}, {0.1});
  const std::vector<int> counts = {3, 5, 2, 8, 7, 4, 6, 5};
  const DispersionMoments vt(0.5, 1.0 / 3.0);
  const Forecast fc = one_step_forecast(counts, theta, vt, spec);

  // Recompute by hand with presample zeros.
  std::vector<double> mu(counts.size());
  for (std::size_t t = 0; t < counts.size(); ++t) {
    double xi = theta.c;
    if (t >= 1) xi += theta.phi[0] * counts[t - 1] + theta.psi[0] * mu[t - 1];
    mu[t] = clipped_laplace(xi, spec.link());
  }
  const double xi_next = theta.c + theta.phi[0] * counts.back() + theta.psi[0] * mu.back();
  const double mean = clipped_laplace(xi_next, spec.link());
  CHECK(fc.mean == doctest::Approx(mean).epsilon(1e-14));
  CHECK(fc.variance ==
        doctest::Approx(conditional_variance(BoundedMean(mean, 15), vt)).epsilon(1e-14));
  CHECK(fc.variance >= variance_lower(fc.mean) - 1e-12);
  CHECK(fc.variance <= variance_upper(BoundedMean(fc.mean, 15)) + 1e-12);
  CHECK_THROWS_AS(one_step_forecast({}, theta, vt, spec), std::invalid_argument);
}
