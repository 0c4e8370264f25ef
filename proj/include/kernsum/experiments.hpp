#pragma once

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_set>
#include <utility>
#include <vector>

#include "kernsum/grid.hpp"
#include "kernsum/kernels.hpp"
#include "kernsum/path.hpp"
#include "kernsum/processes.hpp"
#include "kernsum/regression.hpp"
#include "kernsum/rng.hpp"
#include "kernsum/split_chain.hpp"
#include "kernsum/stats.hpp"
#include "kernsum/sums.hpp"

namespace kernsum {

struct config_rejected : std::invalid_argument {
  explicit config_rejected(const std::string& what) : std::invalid_argument(what) {}
};

struct fit_undefined : std::runtime_error {
  explicit fit_undefined(const std::string& what) : std::runtime_error(what) {}
};

// ---------------------------------------------------------------------------
// Process plumbing: a flat, file-configurable description of one regressor.

struct ProcessSpec {
  ProcessKind kind = ProcessKind::random_walk;
  InnovationDist dist;          // innovation law (gaussian by default)
  double rho = 0.7;             // mixing_ar coefficient / linear geometric ratio
  double a1 = 0.3, a2 = -0.6;   // tar or arch coefficients
  double tail_tol = 1e-8;       // linear-process truncation tolerance
  int burn_in = default_burn_in;

  Path generate(std::int64_t n, std::uint64_t seed) const {
    switch (kind) {
      case ProcessKind::random_walk: return gen_random_walk(n, dist, seed);
      case ProcessKind::linear_process:
        return gen_linear_process(n, CoefFamily::geo(rho), dist, tail_tol, seed);
      case ProcessKind::tar: return gen_tar(n, a1, a2, dist, seed, burn_in);
      case ProcessKind::arch: return gen_arch(n, a1, a2, dist, seed, burn_in);
      case ProcessKind::mixing_ar: return gen_mixing_ar(n, rho, dist, seed, burn_in);
      case ProcessKind::split_chain: {
        auto [p, rec] = gen_split_chain(n, make_ar1_split_chain(0.5), seed);
        (void)rec;
        return p;
      }
      case ProcessKind::constructed: break;
    }
    throw std::invalid_argument("ProcessSpec: cannot generate a 'constructed' path");
  }

  // Diagnostic the config gate runs before spending compute; empty == fine.
  std::string failing_assumption() const {
    switch (kind) {
      case ProcessKind::tar: {
        const auto r = check_tar_contraction(a1, a2, dist);
        if (!r.pass)
          return "tar contraction: E log L = log max(|a1|,|a2|) must be negative and E L^2 < 1";
        return {};
      }
      case ProcessKind::arch: {
        const auto r = check_arch_contraction(a1, a2, dist);
        if (!r.pass) return "arch stability: need a1 > 0 and a2^2 E eps^2 < 1";
        return {};
      }
      case ProcessKind::mixing_ar:
        if (!(std::fabs(rho) < 1.0)) return "mixing AR(1): |rho| must be < 1";
        return {};
      case ProcessKind::linear_process:
        if (!(std::fabs(rho) < 1.0)) return "linear process: |rho| must be < 1";
        return {};
      default: return {};
    }
  }

  std::string describe() const {
    std::string s = process_name(kind);
    s += "(";
    switch (kind) {
      case ProcessKind::mixing_ar:
      case ProcessKind::linear_process: s += "rho=" + std::to_string(rho); break;
      case ProcessKind::tar:
      case ProcessKind::arch:
        s += "a1=" + std::to_string(a1) + ",a2=" + std::to_string(a2);
        break;
      default: break;
    }
    s += ";";
    s += dist.name();
    s += ")";
    return s;
  }
};

// Whether the regressor is stationary-class (V_n scale nh) or null-recurrent
// random-walk-class (scale sqrt(n) h).
inline NormalizationProfile natural_profile(ProcessKind kind) {
  if (kind == ProcessKind::random_walk || kind == ProcessKind::split_chain)
    return NormalizationProfile{NormalizationProfile::Kind::random_walk, 0.5};
  return NormalizationProfile{NormalizationProfile::Kind::stationary, 1.0};
}

// ---------------------------------------------------------------------------

enum class Statistic { sup_v_ratio, sup_s_ratio, inf_recip_ratio, nw_sup_error };

inline const char* statistic_name(Statistic s) {
  switch (s) {
    case Statistic::sup_v_ratio: return "sup_v_ratio";
    case Statistic::sup_s_ratio: return "sup_s_ratio";
    case Statistic::inf_recip_ratio: return "inf_recip_ratio";
    case Statistic::nw_sup_error: return "nw_sup_error";
  }
  return "?";
}

inline Statistic parse_statistic(const std::string& s) {
  if (s == "sup_v_ratio") return Statistic::sup_v_ratio;
  if (s == "sup_s_ratio") return Statistic::sup_s_ratio;
  if (s == "inf_recip_ratio") return Statistic::inf_recip_ratio;
  if (s == "nw_sup_error") return Statistic::nw_sup_error;
  throw std::invalid_argument("unknown statistic: " + s);
}

struct ExperimentConfig {
  std::string target = "custom";
  ProcessSpec process;
  ErrorSpec errors = ErrorSpec::exogenous(InnovationDist{}, 11);
  KernelId kernel = KernelId::epanechnikov;
  BandwidthRule bandwidth;          // h = c n^{-gamma}, default n^{-1/5}
  GridSpec grid = GridSpec::fixed(8.0);
  NormalizationProfile profile;     // c_n = a(n) h
  RegressionFunction truth = RegressionFunction::logistic(1.0, 3.0);
  std::vector<std::int64_t> n_grid = {1024, 2048, 4096};
  int replicates = 200;
  std::uint64_t base_seed = 1;
  Statistic statistic = Statistic::sup_v_ratio;
  double epsilon0 = 0.1;            // bandwidth slack; moment order p = ceil(1 + 1/eps0)
  bool override_checks = false;

  bool uses_errors() const {
    return statistic == Statistic::sup_s_ratio || statistic == Statistic::nw_sup_error;
  }

  // The assumption gate: every reason this run would be meaningless, or empty.
  std::vector<std::string> failed_assumptions() const {
    std::vector<std::string> bad;
    if (n_grid.empty() || !std::is_sorted(n_grid.begin(), n_grid.end()) ||
        std::adjacent_find(n_grid.begin(), n_grid.end()) != n_grid.end())
      bad.push_back("config: n-grid must be non-empty, ascending, distinct");
    if (replicates < 1) bad.push_back("config: replicates must be >= 1");
    if (!bandwidth.valid_over(n_grid))
      bad.push_back("bandwidth rule: need h -> 0 and n h -> infinity over the n-grid");
    if (auto p = process.failing_assumption(); !p.empty()) bad.push_back(p);
    if (statistic == Statistic::sup_v_ratio &&
        profile.kind == NormalizationProfile::Kind::stationary && !Kernel::make(kernel).compact())
      bad.push_back("stationary V identification needs a compactly supported kernel");
    if (uses_errors() && !n_grid.empty()) {
      const auto rep = check_moment_rate(bandwidth, profile, errors.p, n_grid);
      if (!rep.pass)
        bad.push_back("moment rate: n c_n^{-p} (log n)^{p-1} must vanish; raise p or slow h");
    }
    return bad;
  }

  void validate() const {
    const auto bad = failed_assumptions();
    if (!bad.empty() && !override_checks) throw config_rejected(bad.front());
  }
};

struct Row {
  std::int64_t n = 0;
  int replicate = 0;
  double value = 0.0;
};

struct ResultTable {
  std::string statistic;
  std::string target;
  std::vector<std::int64_t> n_grid;
  int replicates = 0;
  std::vector<Row> rows;  // ordered by (n, replicate)

  std::vector<double> medians_per_n() const {
    std::vector<double> out;
    out.reserve(n_grid.size());
    std::vector<double> buf;
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
      buf.clear();
      for (int r = 0; r < replicates; ++r)
        buf.push_back(rows[i * static_cast<std::size_t>(replicates) + static_cast<std::size_t>(r)].value);
      out.push_back(median(buf));
    }
    return out;
  }
};

// ---------------------------------------------------------------------------

namespace detail {

inline double one_statistic(const ExperimentConfig& cfg, std::int64_t n, std::uint64_t seed) {
  const double nd = static_cast<double>(n);
  const double h = cfg.bandwidth.h(nd);
  const double c_n = cfg.profile.c_n(nd, h);
  const UniformGrid grid = cfg.grid.realize(nd, h, c_n);
  const Kernel kernel = Kernel::make(cfg.kernel);
  const Path x = cfg.process.generate(n, derive_seed(seed, 101, 0));

  switch (cfg.statistic) {
    case Statistic::sup_v_ratio: {
      const auto ex = variance_extremes(x, kernel, h, grid);
      return ex.sup.value / c_n;
    }
    case Statistic::inf_recip_ratio: {
      const auto ex = variance_extremes(x, kernel, h, grid);
      if (ex.inf.value == 0.0 || ex.inactive_points > 0)
        return std::numeric_limits<double>::infinity();
      return c_n / ex.inf.value;
    }
    case Statistic::sup_s_ratio: {
      const std::vector<double> u = gen_errors(x, cfg.errors, derive_seed(seed, 202, 0));
      const auto sup = martingale_sup_multi(x, {&u}, kernel, h, grid);
      return sup.front().value / std::sqrt(c_n * std::log(nd));
    }
    case Statistic::nw_sup_error: {
      const std::vector<double> u = gen_errors(x, cfg.errors, derive_seed(seed, 202, 0));
      std::vector<double> y(u.size());
      for (std::size_t t = 0; t < y.size(); ++t) y[t] = cfg.truth(x.values[t]) + u[t];
      return nw_uniform_error(x, y, cfg.truth, kernel, h, grid).sup_error;
    }
  }
  throw std::logic_error("one_statistic: unhandled statistic");
}

}  // namespace detail

// One row per (n, replicate).  Each slot owns a seed derived from
// (base, n-index, replicate), so the table is identical however many worker
// threads execute it.
inline ResultTable run_experiment(const ExperimentConfig& cfg, int threads = 1) {
  cfg.validate();
  ResultTable table;
  table.statistic = statistic_name(cfg.statistic);
  table.target = cfg.target;
  table.n_grid = cfg.n_grid;
  table.replicates = cfg.replicates;
  const std::size_t slots = cfg.n_grid.size() * static_cast<std::size_t>(cfg.replicates);
  table.rows.resize(slots);

  const auto work = [&](std::size_t slot) {
    const std::size_t ni = slot / static_cast<std::size_t>(cfg.replicates);
    const int rep = static_cast<int>(slot % static_cast<std::size_t>(cfg.replicates));
    const std::int64_t n = cfg.n_grid[ni];
    const std::uint64_t seed =
        derive_seed(cfg.base_seed, static_cast<std::uint64_t>(ni), static_cast<std::uint64_t>(rep));
    table.rows[slot] = Row{n, rep, detail::one_statistic(cfg, n, seed)};
  };

  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(slots)));
  if (workers == 1) {
    for (std::size_t slot = 0; slot < slots; ++slot) work(slot);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr first_error;
    std::atomic<bool> failed{false};
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t slot = next.fetch_add(1);
          if (slot >= slots || failed.load()) return;
          try {
            work(slot);
          } catch (...) {
            if (!failed.exchange(true)) first_error = std::current_exception();
            return;
          }
        }
      });
    for (auto& t : pool) t.join();
    if (failed.load()) std::rethrow_exception(first_error);
  }
  return table;
}

// Distinct seeds across all (n, replicate) slots; the collision-freedom
// invariant is |set| == slots.
inline std::size_t distinct_seed_count(const ExperimentConfig& cfg) {
  std::unordered_set<std::uint64_t> seen;
  for (std::size_t ni = 0; ni < cfg.n_grid.size(); ++ni)
    for (int rep = 0; rep < cfg.replicates; ++rep)
      seen.insert(derive_seed(cfg.base_seed, static_cast<std::uint64_t>(ni),
                              static_cast<std::uint64_t>(rep)));
  return seen.size();
}

// ---------------------------------------------------------------------------

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double slope_se = 0.0;
  std::vector<double> medians;
  std::vector<double> regressor;  // the x-values whose log was used
};

// OLS of log(per-n median) on log(x_i); medians must be positive and finite.
inline RateFit fit_rate_against(const ResultTable& table, const std::vector<double>& xs,
                                int min_replicates = 50) {
  if (table.n_grid.size() < 3) throw std::invalid_argument("fit_rate: needs >= 3 distinct n values");
  if (xs.size() != table.n_grid.size())
    throw std::invalid_argument("fit_rate: regressor length mismatch");
  if (table.replicates < min_replicates)
    throw std::invalid_argument("fit_rate: needs >= " + std::to_string(min_replicates) +
                                " replicates per n");
  const std::vector<double> med = table.medians_per_n();
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < med.size(); ++i) {
    if (!(med[i] > 0.0) || !std::isfinite(med[i]))
      throw fit_undefined("fit_rate: non-positive or non-finite median at n = " +
                          std::to_string(table.n_grid[i]));
    lx.push_back(std::log(xs[i]));
    ly.push_back(std::log(med[i]));
  }
  const LinearFit f = ols(lx, ly);
  RateFit r{f.slope, f.intercept, f.r_squared, f.slope_se, med, xs};
  return r;
}

inline RateFit fit_rate(const ResultTable& table, int min_replicates = 50) {
  std::vector<double> xs;
  for (std::int64_t n : table.n_grid) xs.push_back(static_cast<double>(n));
  return fit_rate_against(table, xs, min_replicates);
}

// ---------------------------------------------------------------------------
// Preset catalog.  Ids are the opaque tokens the experiment files use.

inline std::vector<std::string> preset_names() {
  return {"T2.1", "T2.1-rw", "T2.3-upper", "T2.3-lower", "C2.1", "C2.1-upper", "C2.1-lower",
          "T3.1", "stationary-ar", "stationary-tar", "stationary-linear"};
}

inline ExperimentConfig preset(const std::string& name) {
  ExperimentConfig cfg;
  cfg.target = name;
  cfg.bandwidth = BandwidthRule{1.0, 0.2, 0.0};

  const auto pow2 = [](int lo, int hi) {
    std::vector<std::int64_t> g;
    for (int k = lo; k <= hi; ++k) g.push_back(std::int64_t{1} << k);
    return g;
  };

  if (name == "T2.1") {
    // stationary martingale sup: AR(1) regressor, exogenous errors
    cfg.process.kind = ProcessKind::mixing_ar;
    cfg.process.rho = 0.7;
    cfg.errors = ErrorSpec::exogenous(InnovationDist{}, 11);
    cfg.grid = GridSpec::fixed(8.0);
    cfg.profile = NormalizationProfile{NormalizationProfile::Kind::stationary, 1.0};
    cfg.n_grid = pow2(10, 16);
    cfg.replicates = 300;
    cfg.statistic = Statistic::sup_s_ratio;
    cfg.epsilon0 = 0.1;
    return cfg;
  }
  if (name == "T2.1-rw") {
    cfg.process.kind = ProcessKind::random_walk;
    cfg.errors = ErrorSpec::exogenous(InnovationDist{}, 11);
    cfg.grid = GridSpec::power(1.0);  // |x| <= n
    cfg.profile = NormalizationProfile{NormalizationProfile::Kind::random_walk, 0.5};
    cfg.n_grid = pow2(10, 16);
    cfg.replicates = 300;
    cfg.statistic = Statistic::sup_s_ratio;
    cfg.epsilon0 = 0.1;
    return cfg;
  }
  if (name == "T2.3-upper" || name == "C2.1" || name == "C2.1-upper") {
    cfg.process.kind = ProcessKind::random_walk;
    cfg.grid = GridSpec::power(1.0);
    cfg.profile = NormalizationProfile{NormalizationProfile::Kind::random_walk, 0.5};
    cfg.n_grid = pow2(10, 17);
    cfg.replicates = 500;
    cfg.statistic = Statistic::sup_v_ratio;
    cfg.epsilon0 = 0.1;
    return cfg;
  }
  if (name == "T2.3-lower" || name == "C2.1-lower") {
    cfg.process.kind = ProcessKind::random_walk;
    cfg.grid = GridSpec::scaled_sqrt(0.1);  // b_n = 0.1 sqrt(n)
    cfg.profile = NormalizationProfile{NormalizationProfile::Kind::random_walk, 0.5};
    cfg.n_grid = pow2(10, 17);
    cfg.replicates = 500;
    cfg.statistic = Statistic::inf_recip_ratio;
    cfg.epsilon0 = 0.1;
    return cfg;
  }
  if (name == "T3.1") {
    cfg.process.kind = ProcessKind::random_walk;
    cfg.errors = ErrorSpec::exogenous(InnovationDist{}, 4);
    cfg.truth = RegressionFunction::logistic(1.0, 3.0);
    cfg.grid = GridSpec::scaled_sqrt(0.1);  // b_n' = 0.1 sqrt(n)
    cfg.profile = NormalizationProfile{NormalizationProfile::Kind::random_walk, 0.5};
    cfg.n_grid = pow2(11, 17);
    cfg.replicates = 300;
    cfg.statistic = Statistic::nw_sup_error;
    cfg.epsilon0 = 1.0 / 3.0;  // p = ceil(1 + 1/eps0) = 4
    return cfg;
  }
  if (name == "stationary-ar" || name == "stationary-tar" || name == "stationary-linear") {
    if (name == "stationary-ar") {
      cfg.process.kind = ProcessKind::mixing_ar;
      cfg.process.rho = 0.7;
    } else if (name == "stationary-tar") {
      cfg.process.kind = ProcessKind::tar;
      cfg.process.a1 = 0.3;
      cfg.process.a2 = -0.6;
    } else {
      cfg.process.kind = ProcessKind::linear_process;
      cfg.process.rho = 0.5;
      cfg.process.tail_tol = 1e-8;
    }
    cfg.grid = GridSpec::fixed(8.0);
    cfg.profile = NormalizationProfile{NormalizationProfile::Kind::stationary, 1.0};
    cfg.n_grid = pow2(10, 16);
    cfg.replicates = 200;
    cfg.statistic = Statistic::sup_v_ratio;
    cfg.epsilon0 = 0.1;
    return cfg;
  }
  throw std::invalid_argument("unknown preset: " + name);
}

// ---------------------------------------------------------------------------
// Flat key=value config files; '#' starts a comment.  Every key has a CLI
// flag twin, applied after the file so flags win.

inline void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                               const std::string& value) {
  const auto num = [&] {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument("config: bad number for " + key);
    return v;
  };
  const auto integer = [&] {
    const double v = num();
    if (v != std::floor(v)) throw std::invalid_argument("config: " + key + " must be an integer");
    return static_cast<std::int64_t>(v);
  };

  if (key == "preset") {
    cfg = preset(value);
  } else if (key == "process") {
    cfg.process.kind = parse_process(value);
  } else if (key == "dist") {
    cfg.process.dist = InnovationDist::parse(value);
  } else if (key == "error-dist") {
    cfg.errors.dist = InnovationDist::parse(value);
  } else if (key == "rho") {
    cfg.process.rho = num();
  } else if (key == "a1") {
    cfg.process.a1 = num();
  } else if (key == "a2") {
    cfg.process.a2 = num();
  } else if (key == "tail-tol") {
    cfg.process.tail_tol = num();
  } else if (key == "kernel") {
    cfg.kernel = Kernel::parse(value).id;
  } else if (key == "h-const") {
    cfg.bandwidth.c = num();
  } else if (key == "h-gamma") {
    cfg.bandwidth.gamma = num();
  } else if (key == "grid-bound") {
    cfg.grid = GridSpec::fixed(num());
  } else if (key == "grid-tau") {
    cfg.grid = GridSpec::scaled_sqrt(num());
  } else if (key == "grid-power") {
    cfg.grid = GridSpec::power(num());
  } else if (key == "grid-spacing") {
    cfg.grid.proof_matched_spacing = false;
    cfg.grid.explicit_spacing = num();
  } else if (key == "profile") {
    cfg.profile = NormalizationProfile::parse(value, cfg.profile.beta);
  } else if (key == "beta") {
    cfg.profile = NormalizationProfile::parse("generic", num());
  } else if (key == "n-min") {
    const std::int64_t lo = integer();
    std::vector<std::int64_t> g;
    for (std::int64_t n : cfg.n_grid)
      if (n >= lo) g.push_back(n);
    cfg.n_grid = std::move(g);
  } else if (key == "n-max") {
    const std::int64_t hi = integer();
    std::vector<std::int64_t> g;
    for (std::int64_t n : cfg.n_grid)
      if (n <= hi) g.push_back(n);
    cfg.n_grid = std::move(g);
  } else if (key == "replicates") {
    cfg.replicates = static_cast<int>(integer());
  } else if (key == "seed") {
    cfg.base_seed = static_cast<std::uint64_t>(integer());
  } else if (key == "statistic") {
    cfg.statistic = parse_statistic(value);
  } else if (key == "p") {
    cfg.errors.p = static_cast<int>(integer());
  } else if (key == "sigma") {
    if (value == "exogenous")
      cfg.errors = ErrorSpec::exogenous(cfg.errors.dist, cfg.errors.p);
    else if (value == "sin")
      cfg.errors = ErrorSpec::endogenous_sin(cfg.errors.dist, cfg.errors.p);
    else
      throw std::invalid_argument("config: sigma must be 'exogenous' or 'sin'");
  } else if (key == "m-alpha") {
    cfg.truth = RegressionFunction::logistic(num(), cfg.truth.b);
  } else if (key == "m-beta") {
    cfg.truth = RegressionFunction::logistic(cfg.truth.a, num());
  } else if (key == "override-checks") {
    cfg.override_checks = value == "1" || value == "true";
  } else {
    throw std::invalid_argument("config: unknown key '" + key + "'");
  }
}

// Returns the keys applied, in file order.
inline std::vector<std::string> load_config(ExperimentConfig& cfg, std::istream& in) {
  std::vector<std::string> applied;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto notspace = [](unsigned char c) { return !std::isspace(c); };
    line.erase(line.begin(), std::find_if(line.begin(), line.end(), notspace));
    line.erase(std::find_if(line.rbegin(), line.rend(), notspace).base(), line.end());
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    key.erase(std::find_if(key.rbegin(), key.rend(), notspace).base(), key.end());
    value.erase(value.begin(), std::find_if(value.begin(), value.end(), notspace));
    apply_config_entry(cfg, key, value);
    applied.push_back(key);
  }
  return applied;
}

// ---------------------------------------------------------------------------

// CSV with lossless floats; +inf prints as "inf" (a legitimate inf_recip
// outcome, not an error).
inline void write_csv(std::ostream& out, const ResultTable& table) {
  out << "n,replicate,statistic,value\n";
  char buf[64];
  for (const Row& r : table.rows) {
    if (std::isinf(r.value)) {
      std::snprintf(buf, sizeof buf, "%s", r.value > 0 ? "inf" : "-inf");
    } else {
      std::snprintf(buf, sizeof buf, "%.17g", r.value);
    }
    out << r.n << ',' << r.replicate << ',' << table.statistic << ',' << buf << '\n';
  }
}

}  // namespace kernsum
