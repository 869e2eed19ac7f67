// File formats: CSV series with a header row, and the JSON fit document the
// command-line tools exchange.
#pragma once

#include <string>
#include <vector>

#include "mvj/estimate.hpp"
#include "mvj/process.hpp"

namespace mvj {

// Errors caused by the caller (missing files, malformed rows, out-of-range
// values); the CLI maps these to its user-error exit status.
struct UserError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A count series shifted to the model scale {0, ..., d}.
struct CountSeries {
  std::vector<int> counts;
  int offset_a = 0;
  int d = 0;
};

// Read `column` from a headered CSV. Values must be integers in
// {offset_a, ..., offset_a + d}; with discretize, fractional values are
// floored first. Errors name the offending row.
CountSeries load_series(const std::string& path, const std::string& column,
                        int offset_a, int d, bool discretize = false);

// Write a simulated path as CSV with columns t, D, mu, xi, r; the count
// column carries the observation-scale value D + offset_a.
void save_series_csv(const std::string& path, const SimulatedPath& sim, int offset_a);

// Fit document: order, support, link scale, offset, method, point estimates,
// standard errors, criterion values and the convergence flag.
std::string fit_to_json(const FitResult& fit);
void save_fit_json(const std::string& path, const FitResult& fit);

// The subset of a fit document needed to forecast or diagnose.
struct LoadedFit {
  ModelSpec spec;
  std::string method;
  ThetaParams theta;
  DispersionMoments vartheta{0.0, 0.0};
  double ssr = 0.0, aic = 0.0, bic = 0.0;
  bool converged = false;

  explicit LoadedFit(const ModelSpec& spec_) : spec(spec_) {}
};

LoadedFit fit_from_json(const std::string& text);
LoadedFit load_fit_json(const std::string& path);

}  // namespace mvj
