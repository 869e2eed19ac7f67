#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "mvj/process.hpp"
#include "mvj/select.hpp"

using namespace mvj;

TEST_CASE("information criteria: frozen spot values") {
  // T = 100, ssr = T e^2 makes the log term T * 2 exactly; penalties are
  // 2 * (3 + p1 + p2) and log(T - max - 1) * (3 + p1 + p2).
  const double e2 = std::exp(2.0);
  CHECK(aic(100 * e2, 100, 1, 0) == doctest::Approx(200.0 + 8.0).epsilon(1e-12));
  CHECK(bic(100 * e2, 100, 1, 0) ==
        doctest::Approx(200.0 + 18.33986991468229).epsilon(1e-12));  // ln(98) * 4
  CHECK(aic(100 * e2, 100, 2, 2) == doctest::Approx(200.0 + 14.0).epsilon(1e-12));
  CHECK(bic(100 * e2, 100, 2, 2) ==
        doctest::Approx(200.0 + 32.02297684952368).epsilon(1e-12));  // ln(97) * 7
}

TEST_CASE("information criteria: zero residual sum maps to -infinity") {
  CHECK(aic(0.0, 50, 1, 1) == -std::numeric_limits<double>::infinity());
  CHECK(bic(0.0, 50, 1, 1) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("information criteria: argument validation") {
  CHECK_THROWS_AS(aic(-1.0, 50, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(aic(10.0, 0, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(bic(10.0, 3, 2, 2), std::invalid_argument);  // log arg <= 0
  CHECK_THROWS_AS(aic(10.0, 50, 0, 0), std::invalid_argument);
  CHECK_THROWS_AS(aic(10.0, 50, 1, -1), std::invalid_argument);
}

TEST_CASE("order pick: minimum wins, ties break to smaller order") {
  std::vector<CriterionCell> table;
  auto cell = [](int p1, int p2, double a, double b, bool ok) {
    CriterionCell c;
    c.p1 = p1;
    c.p2 = p2;
    c.aic = a;
    c.bic = b;
    c.ok = ok;
    return c;
  };
  table.push_back(cell(1, 0, 10.0, 12.0, true));
  table.push_back(cell(1, 1, 8.0, 13.0, true));
  table.push_back(cell(2, 0, 8.0, 11.0, true));
  table.push_back(cell(2, 1, 9.0, 11.0, true));
  // AIC tie at 8 between (1,1) and (2,0): both have total order 2, smaller
  // p1 wins.
  CHECK(pick_order(table, false) == std::pair{1, 1});
  // BIC tie at 11 between (2,0) and (2,1): smaller total order wins.
  CHECK(pick_order(table, true) == std::pair{2, 0});
  // Failed cells are invisible to the pick.
  table[1].ok = false;
  CHECK(pick_order(table, false) == std::pair{2, 0});
  // -infinity (perfect fit) dominates everything.
  table.push_back(cell(2, 2, -std::numeric_limits<double>::infinity(),
                       -std::numeric_limits<double>::infinity(), true));
  CHECK(pick_order(table, false) == std::pair{2, 2});
  CHECK_THROWS_AS(pick_order({}, false), std::runtime_error);
  table.clear();
  table.push_back(cell(1, 0, 1.0, 1.0, false));
  CHECK_THROWS_AS(pick_order(table, false), std::runtime_error);
}

TEST_CASE("grid selection recovers a first-order model most of the time") {
  const ModelSpec spec(1, 0, 15, 1.0);
  const ThetaParams truth(-0.2, {0.5}, {});
  const SimulatedPath path =
      simulate_mvj(truth, RDistribution::Beta(1.0, 1.0), spec, 1500, 500, 7);
  const SelectionResult sel = select_order(path.counts, {2, 2}, spec);
  REQUIRE(sel.table.size() == 6);  // p1 in {1,2}, p2 in {0,1,2}
  for (const CriterionCell& c : sel.table) {
    CHECK(c.ok);
    CHECK(c.ssr > 0.0);
    CHECK(std::isfinite(c.aic));
    CHECK(c.bic > c.aic);  // log(T - ...) > 2 at this T
  }
  // BIC's heavier penalty should not pick a larger total order than AIC.
  const auto [a1, a2] = sel.aic_choice;
  const auto [b1, b2] = sel.bic_choice;
  CHECK(b1 + b2 <= a1 + a2);
  // The true order is first order in the counts; BIC should find exactly it
  // on a series this long (frozen seed, deterministic fit).
  CHECK(b1 == 1);
  CHECK(b2 == 0);
}

TEST_CASE("ssr decreases weakly as the grid grows along nested orders") {
  const ModelSpec spec(1, 1, 15, 1.0);
  const ThetaParams truth(-0.2, {0.4}, {0.4});
  const SimulatedPath path =
      simulate_mvj(truth, RDistribution::Beta(1.0, 1.0), spec, 800, 500, 9);
  const SelectionResult sel = select_order(path.counts, {2, 2}, spec);
  auto ssr_of = [&](int p1, int p2) {
    for (const CriterionCell& c : sel.table)
      if (c.p1 == p1 && c.p2 == p2) return c.ssr;
    throw std::logic_error("cell not found");
  };
  // A nested larger model can only lower the minimized criterion
  // (up to optimizer slack).
  CHECK(ssr_of(2, 0) <= ssr_of(1, 0) * (1.0 + 1e-6));
  CHECK(ssr_of(1, 1) <= ssr_of(1, 0) * (1.0 + 1e-6));
  CHECK(ssr_of(2, 2) <= ssr_of(1, 1) * (1.0 + 1e-6));
}

TEST_CASE("pearson residuals standardize the one-step errors") {
  const ModelSpec spec(1, 0, 15, 1.0);
  const ThetaParams truth(-0.2, {0.5}, {});
  const SimulatedPath path =
      simulate_mvj(truth, RDistribution::Beta(1.0, 1.0), spec, 20000, 500, 21);
  const std::vector<double> pr =
      pearson_residuals(path.counts, truth, DispersionMoments(0.5, 1.0 / 3.0), spec, 1e-8);
  REQUIRE(pr.size() == path.counts.size());
  double m = 0.0, s2 = 0.0;
  for (double v : pr) m += v;
  m /= pr.size();
  for (double v : pr) s2 += (v - m) * (v - m);
  s2 /= pr.size();
  // At the true parameters the scaled residuals have mean 0, variance 1.
  CHECK(std::abs(m) < 0.03);
  CHECK(std::abs(s2 - 1.0) < 0.05);
  // And they should look serially uncorrelated.
  const std::vector<double> acf = sample_acf(pr, 5);
  for (double a : acf) CHECK(std::abs(a) < 0.03);
}

TEST_CASE("adequacy statistics on a tiny hand-checked input") {
  const std::vector<int> counts = {3, 5};
  const std::vector<double> mu = {2.0, 6.0};
  const std::vector<double> pearson = {0.5, -1.0};
  const AdequacyStats st = adequacy_stats(counts, mu, pearson);
  CHECK(st.mar == doctest::Approx((1.0 + 1.0) / 2.0).epsilon(1e-15));
  CHECK(st.mspr == doctest::Approx((0.25 + 1.0) / 2.0).epsilon(1e-15));
  CHECK_THROWS_AS(adequacy_stats(counts, {2.0}, pearson), std::invalid_argument);
  CHECK_THROWS_AS(adequacy_stats({}, {}, {}), std::invalid_argument);
}

TEST_CASE("sample ACF: exact values on a short vector") {
  // x = {1, 2, 3, 4}: deviations (-1.5, -0.5, 0.5, 1.5), so with the 1/T
  // divisor c0 = 5/4, c1 = 1.25/4, c2 = -1.5/4.
  const std::vector<double> x = {1, 2, 3, 4};
  const std::vector<double> acf = sample_acf(x, 2);
  REQUIRE(acf.size() == 2);
  CHECK(acf[0] == doctest::Approx(1.25 / 5.0).epsilon(1e-14));
  CHECK(acf[1] == doctest::Approx(-1.5 / 5.0).epsilon(1e-14));
  CHECK_THROWS_AS(sample_acf({1.0, 1.0, 1.0}, 1), std::domain_error);  // zero variance
  CHECK_THROWS_AS(sample_acf(x, 0), std::invalid_argument);
  CHECK_THROWS_AS(sample_acf(x, 4), std::invalid_argument);  // lag >= length
}

TEST_CASE("sample PACF matches the Yule-Walker solution of an AR(1)") {
  // For an AR(1) the PACF is (rho, 0, 0, ...) in population; check the
  // Durbin-Levinson identities on the *sample* ACF instead, which are exact.
  const ModelSpec spec(1, 0, 15, 1.0);
  const SimulatedPath path = simulate_mvj(ThetaParams(-0.2, {0.5}, {}),
                                          RDistribution::Beta(1.0, 1.0), spec, 3000, 500, 23);
  std::vector<double> x(path.counts.begin(), path.counts.end());
  const std::vector<double> acf = sample_acf(x, 3);
  const std::vector<double> pacf = sample_pacf(x, 3);
  REQUIRE(pacf.size() == 3);
  // Lag-1 partial equals the lag-1 autocorrelation by definition.
  CHECK(pacf[0] == doctest::Approx(acf[0]).epsilon(1e-13));
  // Lag-2 partial: (rho2 - rho1^2) / (1 - rho1^2).
  CHECK(pacf[1] == doctest::Approx((acf[1] - acf[0] * acf[0]) /
                                   (1.0 - acf[0] * acf[0])).epsilon(1e-12));
  // The process is first order in counts only, so higher partials are small.
  CHECK(std::abs(pacf[1]) < 0.08);
  CHECK(std::abs(pacf[2]) < 0.08);
}

TEST_CASE("diagnostics report wires the pieces together") {
  const ModelSpec spec(1, 1, 15, 1.0);
  const ThetaParams truth(-0.2, {0.4}, {0.4});
  const SimulatedPath path =
      simulate_mvj(truth, RDistribution::Beta(1.0, 1.0), spec, 4000, 500, 25);
  const DiagnosticsReport rep =
      diagnose(path.counts, truth, DispersionMoments(0.5, 1.0 / 3.0), spec, 10, 1e-8);
  REQUIRE(rep.residual_acf.size() == 10);
  CHECK(std::abs(rep.residual_mean) < 0.05);
  CHECK(rep.residual_sd == doctest::Approx(1.0).epsilon(0.08));
  CHECK(rep.mar > 0.0);
  CHECK(rep.mspr == doctest::Approx(1.0).epsilon(0.1));
  double max_abs = 0.0;
  for (double a : rep.residual_acf) max_abs = std::max(max_abs, std::abs(a));
  CHECK(rep.max_abs_acf == doctest::Approx(max_abs).epsilon(1e-15));
  // Correct model: residual autocorrelations inside a loose 5/sqrt(T) band.
  CHECK(rep.max_abs_acf < 5.0 / std::sqrt(4000.0));
}

TEST_CASE("misspecified fit shows structure the right fit removes") {
  // Generate from a model with strong mean feedback, then diagnose with the
  // feedback coefficient zeroed out: leftover autocorrelation must appear.
  const ModelSpec spec(1, 1, 15, 1.0);
  const ThetaParams truth(-0.2, {0.4}, {0.4});
  const SimulatedPath path =
      simulate_mvj(truth, RDistribution::Beta(1.0, 1.0), spec, 4000, 500, 27);
  const ModelSpec small(1, 0, 15, 1.0);
  const ThetaParams wrong(-0.2, {0.4}, {});
  const DiagnosticsReport bad =
      diagnose(path.counts, wrong, DispersionMoments(0.5, 1.0 / 3.0), small, 10, 1e-8);
  const DiagnosticsReport good =
      diagnose(path.counts, truth, DispersionMoments(0.5, 1.0 / 3.0), spec, 10, 1e-8);
  CHECK(bad.max_abs_acf > 3.0 * good.max_abs_acf);
}
