#include "mvj/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

// Surrounding double quotes are tolerated on any cell (header or value);
// embedded separators inside quotes are not supported.
std::string strip_quotes(const std::string& s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
    return s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(strip_quotes(trim(cell)));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_number(const std::string& cell, int row, const std::string& column) {
  const std::string t = trim(cell);
  if (t.empty())
    throw mvj::UserError("row " + std::to_string(row) + ": empty value in column '" +
                         column + "'");
  std::size_t consumed = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &consumed);
  } catch (const std::exception&) {
    throw mvj::UserError("row " + std::to_string(row) + ": cannot parse '" + t +
                         "' in column '" + column + "'");
  }
  if (consumed != t.size())
    throw mvj::UserError("row " + std::to_string(row) + ": cannot parse '" + t +
                         "' in column '" + column + "'");
  return v;
}

json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

double number_or_neg_inf(const json& j, const char* key) {
  if (!j.contains(key)) throw mvj::UserError(std::string("fit document missing '") + key + "'");
  if (j[key].is_null()) return -std::numeric_limits<double>::infinity();
  if (!j[key].is_number()) throw mvj::UserError(std::string("fit document: '") + key + "' must be a number");
  return j[key].get<double>();
}

}  // namespace

namespace mvj {

CountSeries load_series(const std::string& path, const std::string& column,
                        int offset_a, int d, bool discretize) {
  if (d < 1) throw UserError("load_series: d must be a positive integer");
  std::ifstream in(path);
  if (!in) throw UserError("cannot open file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw UserError(path + ": empty file");
  const std::vector<std::string> header = split_csv_line(line);
  int col = -1;
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == column) col = static_cast<int>(i);
  if (col < 0) {
    std::string available;
    for (std::size_t i = 0; i < header.size(); ++i)
      available += (i ? ", " : "") + header[i];
    throw UserError(path + ": no column named '" + column +
                    "' (available: " + available + ")");
  }

  CountSeries out;
  out.offset_a = offset_a;
  out.d = d;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (col >= static_cast<int>(cells.size()))
      throw UserError(path + ": row " + std::to_string(row) + " has too few columns");
    double v = parse_number(cells[col], row, column);
    if (discretize) {
      v = static_cast<double>(floor_delta(v));
    } else if (v != std::floor(v)) {
      throw UserError(path + ": row " + std::to_string(row) + ": value " +
                      cells[col] + " is not an integer (use discretization to floor it)");
    }
    const double shifted = v - offset_a;
    if (shifted < 0 || shifted > d) {
      std::ostringstream msg;
      msg << path << ": row " << row << ": value " << v << " outside {"
          << offset_a << ", ..., " << (offset_a + d) << "}";
      throw UserError(msg.str());
    }
    out.counts.push_back(static_cast<int>(shifted));
  }
  if (out.counts.empty()) throw UserError(path + ": no data rows");
  return out;
}

void save_series_csv(const std::string& path, const SimulatedPath& sim, int offset_a) {
  std::ofstream out(path);
  if (!out) throw UserError("cannot write file: " + path);
  out << "t,D,mu,xi,r\n";
  char buf[96];
  for (std::size_t t = 0; t < sim.counts.size(); ++t) {
    std::snprintf(buf, sizeof buf, "%zu,%d,%.17g,%.17g,%.17g\n", t + 1,
                  sim.counts[t] + offset_a, sim.mu[t], sim.xi[t], sim.r[t]);
    out << buf;
  }
  if (!out) throw UserError("write failed: " + path);
}

std::string fit_to_json(const FitResult& fit) {
  json j;
  j["order"] = {fit.spec.p1, fit.spec.p2};
  j["d"] = fit.spec.d;
  j["sigma"] = fit.spec.sigma;
  j["offset"] = fit.spec.offset_a;
  j["method"] = fit.method;
  j["theta"] = fit.theta.flat();
  j["vartheta"] = {fit.vartheta.vartheta1, fit.vartheta.vartheta2};
  std::vector<json> sd_theta;
  for (int i = 0; i < fit.cov_theta.rows(); ++i)
    sd_theta.push_back(finite_or_null(std::sqrt(std::max(fit.cov_theta(i, i), 0.0))));
  j["sd_theta"] = sd_theta;
  j["sd_vartheta"] = {finite_or_null(std::sqrt(std::max(fit.cov_vartheta(0, 0), 0.0))),
                      finite_or_null(std::sqrt(std::max(fit.cov_vartheta(1, 1), 0.0)))};
  j["ssr"] = fit.ssr;
  j["aic"] = finite_or_null(fit.aic);
  j["bic"] = finite_or_null(fit.bic);
  j["converged"] = fit.converged;
  if (!fit.warnings.empty()) j["warnings"] = fit.warnings;
  return j.dump(2) + "\n";
}

void save_fit_json(const std::string& path, const FitResult& fit) {
  std::ofstream out(path);
  if (!out) throw UserError("cannot write file: " + path);
  out << fit_to_json(fit);
  if (!out) throw UserError("write failed: " + path);
}

LoadedFit fit_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw UserError(std::string("invalid fit document: ") + e.what());
  }
  for (const char* key : {"order", "d", "sigma", "offset", "method", "theta", "vartheta"})
    if (!j.contains(key))
      throw UserError(std::string("fit document missing '") + key + "'");
  const auto order = j["order"].get<std::vector<int>>();
  if (order.size() != 2) throw UserError("fit document: 'order' must have two entries");

  try {
    const ModelSpec spec(order[0], order[1], j["d"].get<int>(), j["sigma"].get<double>(),
                         j["offset"].get<int>());
    const auto theta_flat = j["theta"].get<std::vector<double>>();
    LoadedFit out{spec};
    out.method = j["method"].get<std::string>();
    out.theta = ThetaParams::from_flat(theta_flat, spec.p1, spec.p2);
    const auto vt = j["vartheta"].get<std::vector<double>>();
    if (vt.size() != 2) throw UserError("fit document: 'vartheta' must have two entries");
    const auto [v1, v2] = project_dispersion(vt[0], vt[1]);
    out.vartheta = DispersionMoments(v1, v2);
    out.ssr = j.value("ssr", 0.0);
    out.aic = number_or_neg_inf(j, "aic");
    out.bic = number_or_neg_inf(j, "bic");
    out.converged = j.value("converged", false);
    return out;
  } catch (const UserError&) {
    throw;
  } catch (const std::exception& e) {
    throw UserError(std::string("invalid fit document: ") + e.what());
  }
}

LoadedFit load_fit_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UserError("cannot open file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return fit_from_json(ss.str());
}

}  // namespace mvj
