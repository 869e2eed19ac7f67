#include "mvj/study.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>

#include "mvj/parallel.hpp"

namespace {

using mvj::ThetaParams;

struct RepRecord {
  bool ok = false;
  bool converged = false;
  std::vector<double> theta;
  std::vector<double> se;
  double vt1 = 0.0, vt2 = 0.0;
};

std::vector<double> sqrt_diag(const Eigen::MatrixXd& m) {
  std::vector<double> out(m.rows());
  for (int i = 0; i < m.rows(); ++i) out[i] = std::sqrt(std::max(m(i, i), 0.0));
  return out;
}

}  // namespace

namespace mvj {

std::pair<int, int> study_order(const std::string& model) {
  if (model == "M1") return {1, 0};
  if (model == "M2") return {1, 1};
  if (model == "M3") return {1, 2};
  if (model == "M4") return {2, 0};
  if (model == "M5") return {2, 1};
  if (model == "M6") return {2, 2};
  throw std::invalid_argument("study_order: unknown model '" + model + "'");
}

ThetaParams study_theta(const std::string& setting, const std::string& model) {
  const auto [p1, p2] = study_order(model);
  (void)p1;
  (void)p2;
  if (setting == "a") {
    if (model == "M1") return ThetaParams(-0.2, {0.5}, {});
    if (model == "M2") return ThetaParams(-0.2, {0.4}, {0.4});
    if (model == "M3") return ThetaParams(-0.2, {0.4}, {0.1, 0.4});
    if (model == "M4") return ThetaParams(-0.2, {0.2, 0.5}, {});
    if (model == "M5") return ThetaParams(-0.2, {0.1, 0.4}, {0.4});
    if (model == "M6") return ThetaParams(-0.2, {0.1, 0.4}, {0.1, 0.3});
  } else if (setting == "b") {
    if (model == "M1") return ThetaParams(5.0, {-0.5}, {});
    if (model == "M2") return ThetaParams(5.0, {-0.4}, {-0.4});
    if (model == "M3") return ThetaParams(5.0, {-0.4}, {-0.1, -0.4});
    if (model == "M4") return ThetaParams(5.0, {-0.2, -0.5}, {});
    if (model == "M5") return ThetaParams(5.0, {-0.1, -0.4}, {-0.4});
    if (model == "M6") return ThetaParams(5.0, {-0.1, -0.4}, {-0.1, -0.3});
  } else {
    throw std::invalid_argument("study_theta: setting must be 'a' or 'b'");
  }
  throw std::invalid_argument("study_theta: unknown model '" + model + "'");
}

void StudyConfig::validate() const {
  if (setting != "a" && setting != "b")
    throw std::invalid_argument("StudyConfig: setting must be 'a' or 'b'");
  if (models.empty()) throw std::invalid_argument("StudyConfig: no models");
  if (sample_sizes.empty()) throw std::invalid_argument("StudyConfig: no sample sizes");
  if (replications < 1) throw std::invalid_argument("StudyConfig: replications must be >= 1");
  if (methods.empty()) throw std::invalid_argument("StudyConfig: no methods");
  for (const std::string& m : methods)
    if (m != "ols" && m != "owls")
      throw std::invalid_argument("StudyConfig: unknown method '" + m + "'");
  if (d < 1 || !(sigma > 0.0) || burn_in < 0)
    throw std::invalid_argument("StudyConfig: invalid d / sigma / burn_in");
}

StudyResult run_study(const StudyConfig& cfg) {
  cfg.validate();
  const RDistribution rdist = RDistribution::Beta(1.0, 1.0);
  StudyResult result;

  // One independent stream per (model, T, replication) so workers never
  // contend and any cell can be reproduced in isolation.
  std::uint64_t stream_base = 0;
  for (std::size_t mi = 0; mi < cfg.models.size(); ++mi) {
    const std::string& model = cfg.models[mi];
    const auto [p1, p2] = study_order(model);
    const ThetaParams truth = study_theta(cfg.setting, model);
    const ModelSpec spec(p1, p2, cfg.d, cfg.sigma, 0);
    const std::vector<double> truth_flat = truth.flat();
    const int P = spec.n_params();

    for (int T : cfg.sample_sizes) {
      std::map<std::string, std::vector<RepRecord>> records;
      for (const std::string& m : cfg.methods)
        records[m] = std::vector<RepRecord>(cfg.replications);
      std::vector<int> aic_pick_ok(cfg.replications, 0), bic_pick_ok(cfg.replications, 0),
          selection_ok(cfg.replications, 0);

      const std::uint64_t cell_base = stream_base;
      parallel_for(cfg.replications, cfg.threads, [&](int rep) {
        const SimulatedPath sim =
            simulate_mvj(truth, rdist, spec, T, cfg.burn_in, cfg.seed, cell_base + rep);
        for (const std::string& m : cfg.methods) {
          RepRecord& rec = records.at(m)[rep];
          try {
            const FitResult fit =
                m == "ols" ? ols_fit(sim.counts, spec) : owls_fit(sim.counts, spec);
            rec.ok = true;
            rec.converged = fit.converged;
            rec.theta = fit.theta.flat();
            rec.se = sqrt_diag(fit.cov_theta);
            rec.vt1 = fit.vartheta.vartheta1;
            rec.vt2 = fit.vartheta.vartheta2;
          } catch (const std::exception&) {
            rec.ok = false;
          }
        }
        if (cfg.with_selection) {
          try {
            const SelectionResult sel =
                select_order(sim.counts, cfg.selection_grid, spec);
            selection_ok[rep] = 1;
            aic_pick_ok[rep] = sel.aic_choice == std::make_pair(p1, p2) ? 1 : 0;
            bic_pick_ok[rep] = sel.bic_choice == std::make_pair(p1, p2) ? 1 : 0;
          } catch (const std::exception&) {
            selection_ok[rep] = 0;
          }
        }
      });
      stream_base += cfg.replications;

      for (const std::string& m : cfg.methods) {
        EstimateAggregate agg;
        agg.model = model;
        agg.T = T;
        agg.method = m;
        agg.truth = truth_flat;
        agg.mean.assign(P, 0.0);
        agg.sd.assign(P, 0.0);
        agg.rmse.assign(P, 0.0);
        agg.mean_se.assign(P, 0.0);
        agg.coverage.assign(P, 0.0);
        // The dispersion truth is fixed by the Beta(1, 1) mixing draw.
        const double vt1_truth = 0.5, vt2_truth = 1.0 / 3.0;
        double vt1_sum = 0, vt1_sq = 0, vt2_sum = 0, vt2_sq = 0;
        double vt1_err = 0, vt2_err = 0;
        int n = 0;
        for (const RepRecord& rec : records[m]) {
          if (!rec.ok) continue;
          ++n;
          if (rec.converged) ++agg.n_converged;
          for (int i = 0; i < P; ++i) {
            agg.mean[i] += rec.theta[i];
            agg.rmse[i] += (rec.theta[i] - truth_flat[i]) * (rec.theta[i] - truth_flat[i]);
            agg.mean_se[i] += rec.se[i];
            if (std::abs(rec.theta[i] - truth_flat[i]) <= 1.959963984540054 * rec.se[i])
              agg.coverage[i] += 1.0;
          }
          vt1_sum += rec.vt1;
          vt1_sq += rec.vt1 * rec.vt1;
          vt2_sum += rec.vt2;
          vt2_sq += rec.vt2 * rec.vt2;
          vt1_err += (rec.vt1 - vt1_truth) * (rec.vt1 - vt1_truth);
          vt2_err += (rec.vt2 - vt2_truth) * (rec.vt2 - vt2_truth);
        }
        agg.n_reps = n;
        if (n > 0) {
          for (int i = 0; i < P; ++i) {
            agg.mean[i] /= n;
            agg.rmse[i] = std::sqrt(agg.rmse[i] / n);
            agg.mean_se[i] /= n;
            agg.coverage[i] /= n;
          }
          // Recompute the spread around the replication mean.
          std::vector<double> ss(P, 0.0);
          for (const RepRecord& rec : records[m]) {
            if (!rec.ok) continue;
            for (int i = 0; i < P; ++i)
              ss[i] += (rec.theta[i] - agg.mean[i]) * (rec.theta[i] - agg.mean[i]);
          }
          for (int i = 0; i < P; ++i)
            agg.sd[i] = n > 1 ? std::sqrt(ss[i] / (n - 1)) : 0.0;
          agg.vartheta1_mean = vt1_sum / n;
          agg.vartheta2_mean = vt2_sum / n;
          agg.vartheta1_rmse = std::sqrt(vt1_err / n);
          agg.vartheta2_rmse = std::sqrt(vt2_err / n);
          agg.vartheta1_sd =
              n > 1 ? std::sqrt(std::max(vt1_sq - n * agg.vartheta1_mean * agg.vartheta1_mean, 0.0) / (n - 1)) : 0.0;
          agg.vartheta2_sd =
              n > 1 ? std::sqrt(std::max(vt2_sq - n * agg.vartheta2_mean * agg.vartheta2_mean, 0.0) / (n - 1)) : 0.0;
        }
        result.estimates.push_back(std::move(agg));
      }

      if (cfg.with_selection) {
        SelectionAggregate sel;
        sel.model = model;
        sel.T = T;
        for (int rep = 0; rep < cfg.replications; ++rep) {
          if (!selection_ok[rep]) continue;
          ++sel.n_reps;
          sel.aic_correct += aic_pick_ok[rep];
          sel.bic_correct += bic_pick_ok[rep];
        }
        result.selection.push_back(sel);
      }
    }
  }

  if (!cfg.outdir.empty()) {
    std::filesystem::create_directories(cfg.outdir);
    {
      std::ofstream out(cfg.outdir + "/estimates_" + cfg.setting + ".csv");
      if (!out) throw std::runtime_error("run_study: cannot write estimates table");
      out << "model,T,method,param,truth,mean,sd,rmse,mean_se,coverage\n";
      char buf[256];
      for (const EstimateAggregate& a : result.estimates) {
        const int a_p1 = study_order(a.model).first;
        for (int i = 0; i < static_cast<int>(a.truth.size()); ++i) {
          const std::string name = i == 0 ? std::string("c")
                                   : i <= a_p1 ? "phi" + std::to_string(i)
                                               : "psi" + std::to_string(i - a_p1);
          std::snprintf(buf, sizeof buf, "%s,%d,%s,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                        a.model.c_str(), a.T, a.method.c_str(), name.c_str(), a.truth[i],
                        a.mean[i], a.sd[i], a.rmse[i], a.mean_se[i], a.coverage[i]);
          out << buf;
        }
        std::snprintf(buf, sizeof buf, "%s,%d,%s,vartheta1,0.5,%.17g,%.17g,%.17g,,\n",
                      a.model.c_str(), a.T, a.method.c_str(), a.vartheta1_mean,
                      a.vartheta1_sd, a.vartheta1_rmse);
        out << buf;
        std::snprintf(buf, sizeof buf,
                      "%s,%d,%s,vartheta2,0.33333333333333331,%.17g,%.17g,%.17g,,\n",
                      a.model.c_str(), a.T, a.method.c_str(), a.vartheta2_mean,
                      a.vartheta2_sd, a.vartheta2_rmse);
        out << buf;
      }
    }
    if (cfg.with_selection) {
      std::ofstream out(cfg.outdir + "/selection_" + cfg.setting + ".csv");
      if (!out) throw std::runtime_error("run_study: cannot write selection table");
      out << "model,T,aic_correct,bic_correct,replications\n";
      for (const SelectionAggregate& s : result.selection)
        out << s.model << ',' << s.T << ',' << s.aic_correct << ',' << s.bic_correct
            << ',' << s.n_reps << "\n";
    }
  }
  return result;
}

}  // namespace mvj
