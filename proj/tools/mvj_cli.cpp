// Command-line front end: simulate / fit / select / forecast / diagnose /
// acf / study. All stochastic commands are pure functions of their inputs
// and --seed. Exit status: 0 success, 1 usage or data error, 2 internal.
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mvj/estimate.hpp"
#include "mvj/io.hpp"
#include "mvj/process.hpp"
#include "mvj/select.hpp"
#include "mvj/study.hpp"

namespace {

using nlohmann::json;

mvj::RDistribution parse_rdist(const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string args = colon == std::string::npos ? "" : text.substr(colon + 1);
  try {
    if (kind == "beta") {
      const auto comma = args.find(',');
      if (comma == std::string::npos)
        throw mvj::UserError("--r beta needs two parameters, e.g. beta:1,1");
      return mvj::RDistribution::Beta(std::stod(args.substr(0, comma)),
                                      std::stod(args.substr(comma + 1)));
    }
    if (kind == "const") return mvj::RDistribution::Constant(std::stod(args));
  } catch (const mvj::UserError&) {
    throw;
  } catch (const std::exception& e) {
    throw mvj::UserError("invalid --r specification '" + text + "': " + e.what());
  }
  throw mvj::UserError("unknown --r kind '" + kind + "' (use beta:A,B or const:R)");
}

mvj::ThetaParams theta_from_cli(const std::vector<double>& flat, int p1, int p2) {
  if (static_cast<int>(flat.size()) != 1 + p1 + p2)
    throw mvj::UserError("--theta needs 1 + p1 + p2 = " + std::to_string(1 + p1 + p2) +
                         " entries, got " + std::to_string(flat.size()));
  return mvj::ThetaParams::from_flat(flat, p1, p2);
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw mvj::UserError("cannot write file: " + out_path);
  out << text;
}

json diagnostics_json(const mvj::DiagnosticsReport& rep) {
  json j;
  j["residual_mean"] = rep.residual_mean;
  j["residual_sd"] = rep.residual_sd;
  j["mar"] = rep.mar;
  j["mspr"] = rep.mspr;
  j["residual_acf"] = rep.residual_acf;
  j["max_abs_acf"] = rep.max_abs_acf;
  return j;
}

struct CommonSeriesArgs {
  std::string in_path;
  std::string column = "D";
  bool discretize = false;
};

void add_series_options(CLI::App* cmd, CommonSeriesArgs& args) {
  cmd->add_option("--in", args.in_path, "input series CSV")->required();
  cmd->add_option("--column", args.column, "series column name (default D)");
  cmd->add_flag("--discretize", args.discretize, "floor fractional values to integers");
}

int run(int argc, char** argv) {
  CLI::App app{"bounded count time series with joint mean/variance dynamics"};
  app.require_subcommand(1);

  // ---- simulate ----
  auto* sim_cmd = app.add_subcommand("simulate", "simulate a trajectory");
  std::vector<int> sim_order{1, 0};
  std::vector<double> sim_theta;
  std::string sim_r = "beta:1,1";
  int sim_d = 15, sim_T = 500, sim_burn = 500, sim_offset = 0;
  double sim_sigma = 1.0;
  std::uint64_t sim_seed = 20240814, sim_stream = 0;
  std::string sim_out;
  sim_cmd->add_option("--order", sim_order, "orders p1,p2")->delimiter(',')->expected(2);
  sim_cmd->add_option("--theta", sim_theta, "flat parameters c,phi...,psi...")
      ->delimiter(',')
      ->required();
  sim_cmd->add_option("--r", sim_r, "mixing distribution: beta:A,B or const:R");
  sim_cmd->add_option("--d", sim_d, "support bound");
  sim_cmd->add_option("--sigma", sim_sigma, "link scale");
  sim_cmd->add_option("--T", sim_T, "observations to keep");
  sim_cmd->add_option("--burn-in", sim_burn, "warm-up steps discarded");
  sim_cmd->add_option("--seed", sim_seed, "generator seed");
  sim_cmd->add_option("--stream", sim_stream, "generator stream");
  sim_cmd->add_option("--offset", sim_offset, "observation-scale offset a");
  sim_cmd->add_option("--out", sim_out, "output CSV path")->required();

  // ---- fit ----
  auto* fit_cmd = app.add_subcommand("fit", "estimate parameters from a series");
  CommonSeriesArgs fit_in;
  add_series_options(fit_cmd, fit_in);
  std::vector<int> fit_order{1, 0};
  int fit_d = 15, fit_offset = 0, fit_bootstrap = 0;
  double fit_sigma = 1.0;
  std::string fit_method = "ols", fit_out;
  std::uint64_t fit_seed = 20240814;
  fit_cmd->add_option("--order", fit_order, "orders p1,p2")->delimiter(',')->expected(2);
  fit_cmd->add_option("--d", fit_d, "support bound");
  fit_cmd->add_option("--sigma", fit_sigma, "link scale");
  fit_cmd->add_option("--offset", fit_offset, "observation-scale offset a");
  fit_cmd->add_option("--method", fit_method, "ols or owls")
      ->check(CLI::IsMember({"ols", "owls"}));
  fit_cmd->add_option("--bootstrap", fit_bootstrap,
                      "dispersion bootstrap resamples (0 = plug-in standard errors)");
  fit_cmd->add_option("--seed", fit_seed, "bootstrap seed");
  fit_cmd->add_option("--out", fit_out, "output JSON path (default stdout)");

  // ---- select ----
  auto* sel_cmd = app.add_subcommand("select", "order selection over a grid");
  CommonSeriesArgs sel_in;
  add_series_options(sel_cmd, sel_in);
  int sel_p1 = 2, sel_p2 = 2, sel_d = 15, sel_offset = 0;
  double sel_sigma = 1.0;
  std::string sel_out;
  sel_cmd->add_option("--p1-max", sel_p1, "largest count-feedback order");
  sel_cmd->add_option("--p2-max", sel_p2, "largest mean-feedback order");
  sel_cmd->add_option("--d", sel_d, "support bound");
  sel_cmd->add_option("--sigma", sel_sigma, "link scale");
  sel_cmd->add_option("--offset", sel_offset, "observation-scale offset a");
  sel_cmd->add_option("--out", sel_out, "output JSON path (default stdout)");

  // ---- forecast ----
  auto* fc_cmd = app.add_subcommand("forecast", "one-step mean and variance");
  CommonSeriesArgs fc_in;
  add_series_options(fc_cmd, fc_in);
  std::string fc_fit, fc_out;
  fc_cmd->add_option("--fit", fc_fit, "fit JSON from the fit command")->required();
  fc_cmd->add_option("--out", fc_out, "output JSON path (default stdout)");

  // ---- diagnose ----
  auto* diag_cmd = app.add_subcommand("diagnose", "Pearson-residual diagnostics");
  CommonSeriesArgs diag_in;
  add_series_options(diag_cmd, diag_in);
  std::string diag_fit, diag_out;
  int diag_lags = 20;
  diag_cmd->add_option("--fit", diag_fit, "fit JSON from the fit command")->required();
  diag_cmd->add_option("--lags", diag_lags, "residual ACF lags");
  diag_cmd->add_option("--out", diag_out, "output JSON path (default stdout)");

  // ---- acf ----
  auto* acf_cmd = app.add_subcommand("acf", "sample autocorrelations of a series");
  CommonSeriesArgs acf_in;
  add_series_options(acf_cmd, acf_in);
  int acf_lags = 20, acf_d = 0, acf_offset = 0;
  bool acf_pacf = false;
  std::string acf_out;
  acf_cmd->add_option("--lags", acf_lags, "number of lags");
  acf_cmd->add_option("--d", acf_d, "support bound (0 = no range check)");
  acf_cmd->add_option("--offset", acf_offset, "observation-scale offset a");
  acf_cmd->add_flag("--pacf", acf_pacf, "also print partial autocorrelations");
  acf_cmd->add_option("--out", acf_out, "output CSV path (default stdout)");

  // ---- study ----
  auto* study_cmd = app.add_subcommand("study", "Monte Carlo replication study");
  mvj::StudyConfig study_cfg;
  study_cfg.outdir = "study_out";
  study_cmd->add_option("--setting", study_cfg.setting, "parameter setting: a or b")
      ->check(CLI::IsMember({"a", "b"}));
  study_cmd->add_option("--models", study_cfg.models, "models M1..M6")->delimiter(',');
  study_cmd->add_option("--T", study_cfg.sample_sizes, "sample sizes")->delimiter(',');
  study_cmd->add_option("--reps", study_cfg.replications, "replications per cell");
  study_cmd->add_option("--methods", study_cfg.methods, "ols,owls")->delimiter(',');
  study_cmd->add_option("--d", study_cfg.d, "support bound");
  study_cmd->add_option("--sigma", study_cfg.sigma, "link scale");
  study_cmd->add_option("--burn-in", study_cfg.burn_in, "warm-up steps");
  study_cmd->add_option("--seed", study_cfg.seed, "generator seed");
  study_cmd->add_flag("--selection", study_cfg.with_selection, "also tabulate order selection");
  study_cmd->add_option("--p1-max", study_cfg.selection_grid.p1_max, "selection grid p1");
  study_cmd->add_option("--p2-max", study_cfg.selection_grid.p2_max, "selection grid p2");
  study_cmd->add_option("--threads", study_cfg.threads, "worker threads (0 = all)");
  study_cmd->add_option("--outdir", study_cfg.outdir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  if (sim_cmd->parsed()) {
    const mvj::ModelSpec spec(sim_order[0], sim_order[1], sim_d, sim_sigma, sim_offset);
    const mvj::ThetaParams theta = theta_from_cli(sim_theta, spec.p1, spec.p2);
    const mvj::RDistribution rdist = parse_rdist(sim_r);
    const mvj::SimulatedPath sim =
        mvj::simulate_mvj(theta, rdist, spec, sim_T, sim_burn, sim_seed, sim_stream);
    mvj::save_series_csv(sim_out, sim, sim_offset);
    std::cout << "wrote " << sim.counts.size() << " observations to " << sim_out << "\n";
    return 0;
  }

  if (fit_cmd->parsed()) {
    const mvj::ModelSpec spec(fit_order[0], fit_order[1], fit_d, fit_sigma, fit_offset);
    const mvj::CountSeries series =
        mvj::load_series(fit_in.in_path, fit_in.column, fit_offset, fit_d, fit_in.discretize);
    mvj::FitResult fit = fit_method == "ols" ? mvj::ols_fit(series.counts, spec)
                                             : mvj::owls_fit(series.counts, spec);
    if (fit_bootstrap > 0) {
      const Eigen::Vector2d sd = mvj::vartheta_bootstrap_sd(
          series.counts, fit.fitted_mu, spec.d, fit_bootstrap, fit_seed);
      fit.cov_vartheta.setZero();
      fit.cov_vartheta(0, 0) = sd(0) * sd(0);
      fit.cov_vartheta(1, 1) = sd(1) * sd(1);
    }
    emit(mvj::fit_to_json(fit), fit_out);
    return 0;
  }

  if (sel_cmd->parsed()) {
    const mvj::ModelSpec base(1, 0, sel_d, sel_sigma, sel_offset);
    const mvj::CountSeries series =
        mvj::load_series(sel_in.in_path, sel_in.column, sel_offset, sel_d, sel_in.discretize);
    mvj::OrderGrid grid;
    grid.p1_max = sel_p1;
    grid.p2_max = sel_p2;
    const mvj::SelectionResult sel = mvj::select_order(series.counts, grid, base);
    json j;
    j["aic_choice"] = {sel.aic_choice.first, sel.aic_choice.second};
    j["bic_choice"] = {sel.bic_choice.first, sel.bic_choice.second};
    json table = json::array();
    for (const mvj::CriterionCell& cell : sel.table) {
      json row;
      row["p1"] = cell.p1;
      row["p2"] = cell.p2;
      row["ok"] = cell.ok;
      if (cell.ok) {
        row["aic"] = std::isfinite(cell.aic) ? json(cell.aic) : json(nullptr);
        row["bic"] = std::isfinite(cell.bic) ? json(cell.bic) : json(nullptr);
        row["ssr"] = cell.ssr;
      } else {
        row["error"] = cell.error;
      }
      table.push_back(row);
    }
    j["table"] = table;
    emit(j.dump(2) + "\n", sel_out);
    return 0;
  }

  if (fc_cmd->parsed()) {
    const mvj::LoadedFit fit = mvj::load_fit_json(fc_fit);
    const mvj::CountSeries series = mvj::load_series(
        fc_in.in_path, fc_in.column, fit.spec.offset_a, fit.spec.d, fc_in.discretize);
    const mvj::Forecast fc =
        mvj::one_step_forecast(series.counts, fit.theta, fit.vartheta, fit.spec);
    json j;
    j["mean"] = fc.mean + fit.spec.offset_a;  // observation scale
    j["variance"] = fc.variance;
    emit(j.dump(2) + "\n", fc_out);
    return 0;
  }

  if (diag_cmd->parsed()) {
    const mvj::LoadedFit fit = mvj::load_fit_json(diag_fit);
    const mvj::CountSeries series = mvj::load_series(
        diag_in.in_path, diag_in.column, fit.spec.offset_a, fit.spec.d, diag_in.discretize);
    const mvj::DiagnosticsReport rep = mvj::diagnose(series.counts, fit.theta,
                                                     fit.vartheta, fit.spec, diag_lags,
                                                     1e-8);
    emit(diagnostics_json(rep).dump(2) + "\n", diag_out);
    return 0;
  }

  if (acf_cmd->parsed()) {
    const int d_check = acf_d > 0 ? acf_d : std::numeric_limits<int>::max() / 2;
    const mvj::CountSeries series =
        mvj::load_series(acf_in.in_path, acf_in.column, acf_offset, d_check,
                         acf_in.discretize);
    std::vector<double> x(series.counts.begin(), series.counts.end());
    const std::vector<double> acf = mvj::sample_acf(x, acf_lags);
    std::vector<double> pacf;
    if (acf_pacf) pacf = mvj::sample_pacf(x, acf_lags);
    std::string text = acf_pacf ? "lag,acf,pacf\n" : "lag,acf\n";
    char buf[96];
    for (int k = 1; k <= acf_lags; ++k) {
      if (acf_pacf)
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", k, acf[k - 1], pacf[k - 1]);
      else
        std::snprintf(buf, sizeof buf, "%d,%.17g\n", k, acf[k - 1]);
      text += buf;
    }
    emit(text, acf_out);
    return 0;
  }

  if (study_cmd->parsed()) {
    const mvj::StudyResult result = mvj::run_study(study_cfg);
    for (const mvj::EstimateAggregate& a : result.estimates) {
      std::printf("%s T=%d %s: converged %d/%d, vartheta (%.3f, %.3f)\n",
                  a.model.c_str(), a.T, a.method.c_str(), a.n_converged, a.n_reps,
                  a.vartheta1_mean, a.vartheta2_mean);
    }
    for (const mvj::SelectionAggregate& s : result.selection) {
      std::printf("%s T=%d selection: AIC %d/%d, BIC %d/%d\n", s.model.c_str(), s.T,
                  s.aic_correct, s.n_reps, s.bic_correct, s.n_reps);
    }
    std::cout << "tables written to " << study_cfg.outdir << "\n";
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const mvj::UserError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
}
