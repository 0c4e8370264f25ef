#pragma once

// JSON summary emission, kept in one translation-unit-friendly corner so the
// vendored parser header is not pulled into the numeric code.

#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kernsum/experiments.hpp"
#include "kernsum/version.hpp"

namespace kernsum {

inline nlohmann::json json_finite(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

inline nlohmann::json to_json(const RateFit& fit) {
  nlohmann::json j;
  j["slope"] = json_finite(fit.slope);
  j["intercept"] = json_finite(fit.intercept);
  j["r_squared"] = json_finite(fit.r_squared);
  j["slope_se"] = json_finite(fit.slope_se);
  j["medians"] = nlohmann::json::array();
  for (double m : fit.medians) j["medians"].push_back(json_finite(m));
  j["regressor"] = fit.regressor;
  return j;
}

// Per-n medians plus the rate fit (when defined) in one document.
inline nlohmann::json experiment_summary(const ExperimentConfig& cfg, const ResultTable& table) {
  nlohmann::json j;
  j["version"] = version_string;
  j["target"] = table.target;
  j["statistic"] = table.statistic;
  j["process"] = cfg.process.describe();
  j["kernel"] = Kernel::make(cfg.kernel).name();
  j["h"] = {{"c", cfg.bandwidth.c}, {"gamma", cfg.bandwidth.gamma}};
  j["profile"] = cfg.profile.name();
  j["replicates"] = table.replicates;
  j["seed"] = cfg.base_seed;
  j["n"] = table.n_grid;
  j["median"] = nlohmann::json::array();
  for (double m : table.medians_per_n()) j["median"].push_back(json_finite(m));
  try {
    j["rate_fit"] = to_json(fit_rate(table));
  } catch (const std::exception& e) {
    j["rate_fit"] = nullptr;
    j["rate_fit_unavailable"] = e.what();
  }
  return j;
}

inline void write_json(std::ostream& out, const nlohmann::json& j) { out << j.dump(2) << "\n"; }

}  // namespace kernsum
