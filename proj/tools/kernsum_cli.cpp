// kernsum command-line front end.
//
// Exit codes: 0 success, 1 runtime/check failure, 2 usage error.  All
// randomness flows from --seed; when absent a seed is drawn from entropy and
// echoed on stderr so any run can be reproduced exactly.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "kernsum/json_report.hpp"
#include "kernsum/kernsum.hpp"

namespace ks = kernsum;

namespace {

std::uint64_t resolve_seed(std::optional<std::uint64_t> seed) {
  if (seed) return *seed;
  std::random_device rd;
  const std::uint64_t drawn = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  std::cerr << "seed drawn from entropy: " << drawn << "\n";
  return drawn;
}

// Writes to --out when given, stdout otherwise.
struct Sink {
  std::ofstream file;
  std::ostream* os = &std::cout;
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file.open(path, std::ios::binary);
      if (!file) throw std::runtime_error("cannot open output file: " + path);
      os = &file;
    }
  }
  std::ostream& stream() { return *os; }
};

std::string fmt17(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// --- shared flag bundles -----------------------------------------------------

struct ProcessOpts {
  std::string process = "random-walk";
  std::string dist = "gaussian";
  double rho = 0.7;
  double a1 = 0.3, a2 = -0.6;
  double tail_tol = 1e-8;
  int burn_in = ks::default_burn_in;

  void attach(CLI::App* cmd) {
    cmd->add_option("--process", process,
                    "regressor process: random-walk | linear | tar | arch | mixing-ar | split-chain")
        ->capture_default_str();
    cmd->add_option("--dist", dist, "innovation law: gaussian | laplace | logistic")
        ->capture_default_str();
    cmd->add_option("--rho", rho, "AR / geometric coefficient")->capture_default_str();
    cmd->add_option("--a1", a1, "tar/arch coefficient a1")->capture_default_str();
    cmd->add_option("--a2", a2, "tar/arch coefficient a2")->capture_default_str();
    cmd->add_option("--tail-tol", tail_tol, "linear-process truncation tail tolerance")
        ->capture_default_str();
    cmd->add_option("--burn-in", burn_in, "burn-in steps for stationary starts")
        ->capture_default_str();
  }

  ks::ProcessSpec spec() const {
    ks::ProcessSpec s;
    s.kind = ks::parse_process(process);
    s.dist = ks::InnovationDist::parse(dist);
    s.rho = rho;
    s.a1 = a1;
    s.a2 = a2;
    s.tail_tol = tail_tol;
    s.burn_in = burn_in;
    return s;
  }
};

struct KernelOpts {
  std::string kernel = "epanechnikov";
  double h_const = 1.0;
  double h_gamma = 0.2;

  void attach(CLI::App* cmd) {
    cmd->add_option("--kernel", kernel, "epanechnikov | triangular | quartic | gaussian")
        ->capture_default_str();
    cmd->add_option("--h-const", h_const, "bandwidth h = c n^{-gamma}: the constant c")
        ->capture_default_str();
    cmd->add_option("--h-gamma", h_gamma, "bandwidth exponent gamma")->capture_default_str();
  }

  ks::Kernel make() const { return ks::Kernel::parse(kernel); }
  double h(double n) const { return ks::BandwidthRule{h_const, h_gamma, 0.0}.h(n); }
};

struct GridOpts {
  double bound = 8.0;
  double tau = 0.0;
  double power = 0.0;
  double spacing = 0.0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--grid-bound", bound, "fixed spatial range: grid covers [-b, b]")
        ->capture_default_str();
    cmd->add_option("--grid-tau", tau, "expanding range b = tau sqrt(n) (overrides --grid-bound)");
    cmd->add_option("--grid-power", power, "expanding range b = n^m (overrides --grid-bound)");
    cmd->add_option("--grid-spacing", spacing, "explicit grid spacing (default: proof-matched)");
  }

  ks::GridSpec spec() const {
    ks::GridSpec g = ks::GridSpec::fixed(bound);
    if (tau > 0.0) g = ks::GridSpec::scaled_sqrt(tau);
    if (power > 0.0) g = ks::GridSpec::power(power);
    if (spacing > 0.0) {
      g.proof_matched_spacing = false;
      g.explicit_spacing = spacing;
    }
    return g;
  }
};

struct ErrorOpts {
  int p = 2;
  std::string sigma = "exogenous";
  std::string dist = "gaussian";

  void attach(CLI::App* cmd) {
    cmd->add_option("--p", p, "error moment order (E|u|^{2p} finite)")->capture_default_str();
    cmd->add_option("--sigma", sigma, "volatility map: exogenous | sin")->capture_default_str();
    cmd->add_option("--error-dist", dist, "error innovation law")->capture_default_str();
  }

  ks::ErrorSpec spec() const {
    const auto d = ks::InnovationDist::parse(dist);
    if (sigma == "exogenous") return ks::ErrorSpec::exogenous(d, p);
    if (sigma == "sin") return ks::ErrorSpec::endogenous_sin(d, p);
    throw std::invalid_argument("--sigma must be 'exogenous' or 'sin'");
  }
};

// --- subcommands ---------------------------------------------------------------

int run_simulate(const ProcessOpts& po, std::int64_t n, std::optional<std::uint64_t> seed_opt,
                 const std::string& out) {
  const std::uint64_t seed = resolve_seed(seed_opt);
  Sink sink(out);
  const ks::ProcessSpec spec = po.spec();
  if (spec.kind == ks::ProcessKind::split_chain) {
    const auto [path, record] = ks::gen_split_chain(n, ks::make_ar1_split_chain(0.5), seed);
    std::vector<std::uint8_t> y(path.n(), 0);
    for (std::int64_t t : record.rho) y[static_cast<std::size_t>(t - 1)] = 1;
    sink.stream() << "t,x,regen\n";
    for (std::size_t t = 0; t < path.n(); ++t)
      sink.stream() << (t + 1) << ',' << fmt17(path.values[t]) << ',' << int(y[t]) << '\n';
    return 0;
  }
  const ks::Path path = spec.generate(n, seed);
  sink.stream() << "t,x\n";
  for (std::size_t t = 0; t < path.n(); ++t)
    sink.stream() << (t + 1) << ',' << fmt17(path.values[t]) << '\n';
  return 0;
}

int run_vsum(const ProcessOpts& po, const KernelOpts& ko, const GridOpts& go, std::int64_t n,
             std::optional<std::uint64_t> seed_opt, const std::string& profile_name, double beta,
             double tail_k0, const std::string& out, const std::string& dump) {
  const std::uint64_t seed = resolve_seed(seed_opt);
  const ks::Path path = po.spec().generate(n, seed);
  const ks::Kernel kernel = ko.make();
  const double nd = static_cast<double>(n);
  const double h = ko.h(nd);
  const auto profile = ks::NormalizationProfile::parse(profile_name, beta);
  const double c_n = profile.c_n(nd, h);
  const ks::UniformGrid grid = go.spec().realize(nd, h, c_n);

  const auto ex = ks::variance_extremes(path, kernel, h, grid);
  const auto ratios = ks::normalized_ratios(0.0, ex.sup.value, ex.inf.value, nd, h, profile);

  nlohmann::json j;
  j["n"] = n;
  j["seed"] = seed;
  j["h"] = h;
  j["c_n"] = c_n;
  j["profile"] = profile.name();
  j["kernel"] = kernel.name();
  j["grid"] = {{"lo", grid.lo}, {"hi", grid.hi()}, {"count", grid.count}, {"step", grid.step}};
  j["sup"] = {{"value", ex.sup.value}, {"at", ex.sup.at}};
  j["inf"] = {{"value", ex.inf.value}, {"at", ex.inf.at}};
  j["active_points"] = ex.active_points;
  j["inactive_points"] = ex.inactive_points;
  j["sup_v_ratio"] = ks::json_finite(ratios.sup_v_ratio);
  j["inf_recip_ratio"] = ks::json_finite(ratios.inf_recip_ratio);
  j["inf_v_zero"] = ratios.inf_v_zero;
  if (tail_k0 > 0.0) {
    const auto tail = ks::tail_condition_check(path, grid.hi(), tail_k0, c_n, kernel, h);
    j["tail"] = {{"moment_stat", tail.moment_stat},
                 {"rate", tail.rate},
                 {"moment_ratio", tail.moment_ratio},
                 {"kernel_term", tail.kernel_term},
                 {"kernel_ratio", tail.kernel_ratio}};
  }

  if (!dump.empty()) {
    const std::vector<double> v = ks::variance_sum(path, kernel, h, grid);
    Sink ds(dump);
    ds.stream() << "x,v\n";
    for (std::int64_t i = 0; i < grid.count; ++i)
      ds.stream() << fmt17(grid.point(i)) << ',' << fmt17(v[static_cast<std::size_t>(i)]) << '\n';
  }
  Sink sink(out);
  ks::write_json(sink.stream(), j);
  return 0;
}

int run_ssum(const ProcessOpts& po, const KernelOpts& ko, const GridOpts& go, const ErrorOpts& eo,
             std::int64_t n, std::optional<std::uint64_t> seed_opt,
             const std::string& profile_name, double beta, const std::string& out,
             const std::string& dump) {
  const std::uint64_t seed = resolve_seed(seed_opt);
  const ks::Path path = po.spec().generate(n, ks::derive_seed(seed, 101, 0));
  const std::vector<double> u = ks::gen_errors(path, eo.spec(), ks::derive_seed(seed, 202, 0));
  const ks::Kernel kernel = ko.make();
  const double nd = static_cast<double>(n);
  const double h = ko.h(nd);
  const auto profile = ks::NormalizationProfile::parse(profile_name, beta);
  const double c_n = profile.c_n(nd, h);
  const ks::UniformGrid grid = go.spec().realize(nd, h, c_n);

  const auto sup = ks::martingale_sup_multi(path, {&u}, kernel, h, grid).front();

  nlohmann::json j;
  j["n"] = n;
  j["seed"] = seed;
  j["h"] = h;
  j["c_n"] = c_n;
  j["profile"] = profile.name();
  j["kernel"] = kernel.name();
  j["sigma"] = eo.sigma;
  j["p"] = eo.p;
  j["grid"] = {{"lo", grid.lo}, {"hi", grid.hi()}, {"count", grid.count}, {"step", grid.step}};
  j["sup_abs"] = {{"value", sup.value}, {"at", sup.at}};
  j["sup_s_ratio"] = sup.value / std::sqrt(c_n * std::log(nd));

  if (!dump.empty()) {
    const std::vector<double> s = ks::martingale_sum(path, u, kernel, h, grid);
    Sink ds(dump);
    ds.stream() << "x,s\n";
    for (std::int64_t i = 0; i < grid.count; ++i)
      ds.stream() << fmt17(grid.point(i)) << ',' << fmt17(s[static_cast<std::size_t>(i)]) << '\n';
  }
  Sink sink(out);
  ks::write_json(sink.stream(), j);
  return 0;
}

ks::RegressionFunction make_truth(const std::string& kind, std::vector<double> params) {
  if (kind == "logistic") {
    if (params.empty()) params = {1.0, 3.0};
    if (params.size() != 2) throw std::invalid_argument("logistic needs --m-params a,b");
    return ks::RegressionFunction::logistic(params[0], params[1]);
  }
  if (kind == "rational") {
    if (params.empty()) params = {3.0};
    if (params.size() != 1) throw std::invalid_argument("rational needs --m-params theta");
    return ks::RegressionFunction::rational(params[0]);
  }
  if (kind == "power") {
    if (params.empty()) params = {1.0, 1.0, 0.5};
    if (params.size() != 3) throw std::invalid_argument("power needs --m-params a,b,g");
    return ks::RegressionFunction::power(params[0], params[1], params[2]);
  }
  if (kind == "polynomial") {
    if (params.empty()) params = {0.0, 1.0};
    return ks::RegressionFunction::polynomial(params);
  }
  throw std::invalid_argument("unknown regression function: " + kind);
}

int run_regress(const ProcessOpts& po, const KernelOpts& ko, const GridOpts& go,
                const ErrorOpts& eo, std::int64_t n, std::optional<std::uint64_t> seed_opt,
                const std::string& m_kind, const std::vector<double>& m_params,
                const std::string& out, const std::string& dump) {
  const std::uint64_t seed = resolve_seed(seed_opt);
  const ks::RegressionFunction truth = make_truth(m_kind, m_params);
  const ks::Path path = po.spec().generate(n, ks::derive_seed(seed, 101, 0));
  const std::vector<double> u = ks::gen_errors(path, eo.spec(), ks::derive_seed(seed, 202, 0));
  std::vector<double> y(u.size());
  for (std::size_t t = 0; t < y.size(); ++t) y[t] = truth(path.values[t]) + u[t];

  const ks::Kernel kernel = ko.make();
  const double nd = static_cast<double>(n);
  const double h = ko.h(nd);
  const auto profile = ks::natural_profile(po.spec().kind);
  const ks::UniformGrid grid = go.spec().realize(nd, h, profile.c_n(nd, h));

  nlohmann::json j;
  j["n"] = n;
  j["seed"] = seed;
  j["h"] = h;
  j["kernel"] = kernel.name();
  j["m"] = truth.name();
  j["holder"] = {{"alpha", truth.holder_alpha()},
                 {"C", truth.holder_C()},
                 {"envelope_sup", truth.envelope_sup(grid)}};
  j["grid"] = {{"lo", grid.lo}, {"hi", grid.hi()}, {"count", grid.count}, {"step", grid.step}};

  if (!dump.empty()) {
    // nw_fit materializes and will refuse grids past the cap
    const ks::NWFit fit = ks::nw_fit(path, y, kernel, h, grid);
    const auto err = ks::uniform_error(fit, truth);
    j["sup_error"] = err.sup_error;
    j["sup_error_at"] = err.at;
    j["fraction_undefined"] = err.fraction_undefined;
    j["defined_count"] = err.defined_count;
    Sink ds(dump);
    ds.stream() << "x,estimate,numerator,denominator,defined\n";
    for (std::int64_t i = 0; i < grid.count; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      ds.stream() << fmt17(grid.point(i)) << ',' << fmt17(fit.estimate[idx]) << ','
                  << fmt17(fit.numerator[idx]) << ',' << fmt17(fit.denominator[idx]) << ','
                  << int(fit.defined[idx]) << '\n';
    }
  } else {
    const auto err = ks::nw_uniform_error(path, y, truth, kernel, h, grid);
    j["sup_error"] = err.sup_error;
    j["sup_error_at"] = err.at;
    j["fraction_undefined"] = err.fraction_undefined;
    j["defined_count"] = err.defined_count;
  }
  Sink sink(out);
  ks::write_json(sink.stream(), j);
  return 0;
}

int run_beta(const ProcessOpts& po, std::int64_t n, std::optional<std::uint64_t> seed_opt,
             const std::string& out) {
  const std::uint64_t seed = resolve_seed(seed_opt);
  const ks::ProcessSpec spec = po.spec();

  ks::RegenRecord record;
  std::string method;
  if (spec.kind == ks::ProcessKind::split_chain) {
    auto [path, rec] = ks::gen_split_chain(n, ks::make_ar1_split_chain(0.5), seed);
    record = std::move(rec);
    method = "split-chain regeneration times";
  } else if (spec.kind == ks::ProcessKind::random_walk) {
    const ks::Path path = ks::gen_random_walk(n, spec.dist, seed);
    record = ks::zero_crossing_record(path);
    method = "zero-crossing proxy";
  } else {
    throw std::invalid_argument("beta: --process must be split-chain or random-walk");
  }

  const auto checkpoints = ks::default_checkpoints(n);
  const ks::HarrisProfile prof = ks::estimate_beta(record, checkpoints);

  nlohmann::json j;
  j["n"] = n;
  j["seed"] = seed;
  j["method"] = method;
  j["regenerations"] = record.count();
  j["beta_hat"] = prof.beta_hat;
  j["beta_se"] = prof.beta_se;
  j["checkpoints"] = checkpoints;
  Sink sink(out);
  ks::write_json(sink.stream(), j);
  return 0;
}

int run_localtime(const KernelOpts& ko, std::int64_t n, int replicates, double shift,
                  std::optional<std::uint64_t> seed_opt, const std::string& out) {
  const std::uint64_t seed = resolve_seed(seed_opt);
  const ks::Kernel kernel = ko.make();
  const double h = ko.h(static_cast<double>(n));
  const auto rep = ks::local_time_comparison(n, h, kernel, replicates, seed, shift);

  nlohmann::json j;
  j["n"] = n;
  j["seed"] = seed;
  j["h"] = h;
  j["kernel"] = kernel.name();
  j["replicates"] = rep.replicates;
  j["shift"] = rep.shift;
  j["ks_distance"] = rep.ks_distance;
  j["p_value"] = rep.p_value;
  j["stat_mean"] = rep.stat_mean;
  j["oracle_mean"] = rep.oracle_mean;
  j["near_zero_frac_stat"] = rep.near_zero_frac_stat;
  j["near_zero_frac_oracle"] = rep.near_zero_frac_oracle;
  j["small_bandwidth_warning"] = rep.small_bandwidth_warning;
  Sink sink(out);
  ks::write_json(sink.stream(), j);
  return 0;
}

int run_check(CLI::App* cmd, const std::string& kernel, double bw_const, double bw_gamma,
              const std::string& profile_name, double beta, int p, std::int64_t n_min,
              std::int64_t n_max, const std::string& process, double a1, double a2,
              const std::string& dist, const std::string& out) {
  nlohmann::json j;
  bool all_pass = true;
  bool any = false;

  if (cmd->count("--kernel")) {
    any = true;
    const ks::Kernel k = ks::Kernel::parse(kernel);
    const auto rep = ks::check_regularity(k);
    j["kernel"] = {{"name", k.name()},
                   {"bounded", rep.bounded},
                   {"lipschitz_verified", rep.lipschitz_verified},
                   {"integrable", rep.integrable},
                   {"square_integrable", rep.square_integrable},
                   {"compact_support", rep.compact_support},
                   {"worst_lipschitz_ratio", rep.worst_lipschitz_ratio},
                   {"integral", rep.quadrature_integral},
                   {"square_integral", rep.quadrature_square_integral},
                   {"pass", rep.pass()}};
    all_pass = all_pass && rep.pass();
  }

  if (cmd->count("--p") || cmd->count("--bandwidth-gamma")) {
    any = true;
    if (n_min < 2 || n_max < n_min)
      throw std::invalid_argument("check: need 2 <= n-min <= n-max");
    std::vector<std::int64_t> grid;
    for (std::int64_t n = n_min; n <= n_max; n *= 2) grid.push_back(n);
    const ks::BandwidthRule rule{bw_const, bw_gamma, 0.0};
    const auto profile = ks::NormalizationProfile::parse(profile_name, beta);
    const auto rep = ks::check_moment_rate(rule, profile, p, grid);
    j["moment_rate"] = {{"profile", profile.name()},
                        {"gamma", bw_gamma},
                        {"p", p},
                        {"n", grid},
                        {"values", rep.values},
                        {"poly_order", rep.poly_order},
                        {"log_order", rep.log_order},
                        {"pass", rep.pass}};
    if (!rep.pass) {
      j["moment_rate"]["hint"] =
          "n c_n^{-p} (log n)^{p-1} must vanish: raise p or slow the bandwidth decay";
    }
    all_pass = all_pass && rep.pass;
  }

  if (cmd->count("--process")) {
    any = true;
    const auto kind = ks::parse_process(process);
    const auto d = ks::InnovationDist::parse(dist);
    ks::ContractionReport rep;
    if (kind == ks::ProcessKind::tar) {
      rep = ks::check_tar_contraction(a1, a2, d);
    } else if (kind == ks::ProcessKind::arch) {
      rep = ks::check_arch_contraction(a1, a2, d);
    } else {
      throw std::invalid_argument("check --process supports tar and arch");
    }
    j["contraction"] = {{"process", process},
                        {"E_log_L", rep.e_log_l},
                        {"E_L_sq", rep.e_l_sq},
                        {"detail", rep.detail},
                        {"pass", rep.pass}};
    all_pass = all_pass && rep.pass;
  }

  if (!any) throw std::invalid_argument("check: nothing to check (pass --kernel, --p, or --process)");
  j["pass"] = all_pass;
  Sink sink(out);
  ks::write_json(sink.stream(), j);
  return all_pass ? 0 : 1;
}

int run_experiment_cmd(CLI::App* cmd, const std::string& preset_name, const std::string& config_path,
                       const std::vector<std::pair<std::string, std::string>>& overrides,
                       std::optional<std::uint64_t> seed_opt, int threads, const std::string& out,
                       const std::string& summary_path) {
  ks::ExperimentConfig cfg;
  if (!preset_name.empty()) cfg = ks::preset(preset_name);
  bool seed_given = cmd->count("--seed") > 0;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw std::runtime_error("cannot open config file: " + config_path);
    for (const std::string& key : ks::load_config(cfg, in))
      if (key == "seed") seed_given = true;
  }
  for (const auto& [key, value] : overrides) ks::apply_config_entry(cfg, key, value);
  if (cmd->count("--seed")) cfg.base_seed = *seed_opt;
  else if (!seed_given)
    cfg.base_seed = resolve_seed(std::nullopt);

  const ks::ResultTable table = ks::run_experiment(cfg, threads);
  {
    Sink sink(out);
    ks::write_csv(sink.stream(), table);
  }
  // summary goes to --summary, or to stdout when the CSV went to a file
  const nlohmann::json j = ks::experiment_summary(cfg, table);
  if (!summary_path.empty()) {
    Sink sum(summary_path);
    ks::write_json(sum.stream(), j);
  } else if (!out.empty()) {
    ks::write_json(std::cout, j);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kernel-weighted sums, regression, and Monte Carlo rate checks for recurrent time series"};
  app.set_version_flag("--version", std::string("kernsum ") + ks::version_string);
  app.require_subcommand(1);

  // shared state filled by flags
  ProcessOpts po;
  KernelOpts ko;
  GridOpts go;
  ErrorOpts eo;
  std::int64_t n = 4096;
  std::optional<std::uint64_t> seed;
  std::string out, dump, profile = "stationary";
  double beta = 1.0;

  const auto add_common = [&](CLI::App* cmd, bool with_n = true) {
    if (with_n) cmd->add_option("--n", n, "sample size")->capture_default_str();
    cmd->add_option("--seed", seed, "RNG seed (drawn from entropy and echoed when absent)");
    cmd->add_option("--out", out, "write output to this file instead of stdout");
  };

  auto* sim = app.add_subcommand("simulate", "generate a regressor path as CSV");
  po.attach(sim);
  add_common(sim);

  auto* vsum = app.add_subcommand("vsum", "conditional-variance kernel sum over a spatial grid");
  po.attach(vsum);
  ko.attach(vsum);
  go.attach(vsum);
  add_common(vsum);
  double tail_k0 = 0.0;
  vsum->add_option("--profile", profile, "normalization: stationary | random-walk | generic")
      ->capture_default_str();
  vsum->add_option("--beta", beta, "regeneration exponent for the generic profile");
  vsum->add_option("--tail-k0", tail_k0, "also run the whole-space tail check with this moment order");
  vsum->add_option("--dump", dump, "write the per-grid-point values to this CSV");

  auto* ssum = app.add_subcommand("ssum", "martingale kernel sum sup over a spatial grid");
  po.attach(ssum);
  ko.attach(ssum);
  go.attach(ssum);
  eo.attach(ssum);
  add_common(ssum);
  ssum->add_option("--profile", profile, "normalization: stationary | random-walk | generic")
      ->capture_default_str();
  ssum->add_option("--beta", beta, "regeneration exponent for the generic profile");
  ssum->add_option("--dump", dump, "write the per-grid-point values to this CSV");

  auto* reg = app.add_subcommand("regress", "Nadaraya-Watson fit against a known response surface");
  po.attach(reg);
  ko.attach(reg);
  go.attach(reg);
  eo.attach(reg);
  add_common(reg);
  std::string m_kind = "logistic";
  std::vector<double> m_params;
  reg->add_option("--m", m_kind, "true regression function: logistic | rational | power | polynomial")
      ->capture_default_str();
  reg->add_option("--m-params", m_params, "function parameters (comma separated)")->delimiter(',');
  reg->add_option("--dump", dump, "write the fitted curve to this CSV");

  auto* beta_cmd = app.add_subcommand("beta", "regeneration-rate exponent from one trajectory");
  po.attach(beta_cmd);
  add_common(beta_cmd);

  auto* lt = app.add_subcommand("localtime", "occupation statistic vs Brownian local-time oracle");
  ko.attach(lt);
  add_common(lt);
  int lt_reps = 400;
  double lt_shift = 0.0;
  lt->add_option("--replicates", lt_reps, "Monte Carlo replicates (>= 100)")->capture_default_str();
  lt->add_option("--shift", lt_shift, "evaluate the occupation statistic at this level");

  auto* check = app.add_subcommand("check", "regularity / rate-compatibility / contraction checks");
  std::string ck_kernel, ck_process, ck_dist = "gaussian", ck_profile = "random-walk";
  double ck_bw_const = 1.0, ck_bw_gamma = 0.2, ck_beta = 1.0, ck_a1 = 0.3, ck_a2 = -0.6;
  int ck_p = 2;
  std::int64_t ck_n_min = 1024, ck_n_max = 1 << 20;
  check->add_option("--kernel", ck_kernel, "verify kernel regularity");
  check->add_option("--bandwidth-const", ck_bw_const, "bandwidth constant c")->capture_default_str();
  check->add_option("--bandwidth-gamma", ck_bw_gamma, "bandwidth exponent gamma")
      ->capture_default_str();
  check->add_option("--profile", ck_profile, "normalization profile for the moment-rate check")
      ->capture_default_str();
  check->add_option("--beta", ck_beta, "regeneration exponent for the generic profile");
  check->add_option("--p", ck_p, "error moment order for the moment-rate check")
      ->capture_default_str();
  check->add_option("--n-min", ck_n_min, "moment-rate grid start")->capture_default_str();
  check->add_option("--n-max", ck_n_max, "moment-rate grid end")->capture_default_str();
  check->add_option("--process", ck_process, "contraction check: tar | arch");
  check->add_option("--a1", ck_a1, "coefficient a1")->capture_default_str();
  check->add_option("--a2", ck_a2, "coefficient a2")->capture_default_str();
  check->add_option("--dist", ck_dist, "innovation law for the arch moment")->capture_default_str();
  check->add_option("--out", out, "write the report to this file");

  auto* exp = app.add_subcommand("experiment", "seeded Monte Carlo sweep over n");
  std::string preset_name, config_path, summary_path;
  int threads = 1;
  exp->add_option("--preset", preset_name, "T2.1 | T2.1-rw | T2.3-upper | T2.3-lower | C2.1 | "
                                           "C2.1-lower | T3.1 | stationary-ar | stationary-tar | "
                                           "stationary-linear");
  exp->add_option("--config", config_path, "flat key=value config file");
  exp->add_option("--threads", threads, "worker thread cap")->capture_default_str();
  exp->add_option("--seed", seed, "base seed");
  exp->add_option("--out", out, "write the replicate table (CSV) here");
  exp->add_option("--summary", summary_path, "write the JSON summary here");
  // every config key doubles as a flag; values are passed through verbatim
  static const char* kKeys[] = {"process", "dist", "error-dist", "rho", "a1", "a2",
                                "tail-tol", "kernel", "h-const", "h-gamma", "grid-bound",
                                "grid-tau", "grid-power", "grid-spacing", "profile", "beta",
                                "n-min", "n-max", "replicates", "statistic", "p", "sigma",
                                "m-alpha", "m-beta", "override-checks"};
  std::map<std::string, std::string> exp_values;
  for (const char* key : kKeys)
    exp->add_option(std::string("--") + key, exp_values[key],
                    std::string("config key '") + key + "'");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*sim) return run_simulate(po, n, seed, out);
    if (*vsum) return run_vsum(po, ko, go, n, seed, profile, beta, tail_k0, out, dump);
    if (*ssum) return run_ssum(po, ko, go, eo, n, seed, profile, beta, out, dump);
    if (*reg) return run_regress(po, ko, go, eo, n, seed, m_kind, m_params, out, dump);
    if (*beta_cmd) return run_beta(po, n, seed, out);
    if (*lt) return run_localtime(ko, n, lt_reps, lt_shift, seed, out);
    if (*check)
      return run_check(check, ck_kernel, ck_bw_const, ck_bw_gamma, ck_profile, ck_beta, ck_p,
                       ck_n_min, ck_n_max, ck_process, ck_a1, ck_a2, ck_dist, out);
    if (*exp) {
      std::vector<std::pair<std::string, std::string>> overrides;
      for (const char* key : kKeys)
        if (exp->count(std::string("--") + key)) overrides.emplace_back(key, exp_values[key]);
      return run_experiment_cmd(exp, preset_name, config_path, overrides, seed, threads, out,
                                summary_path);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
