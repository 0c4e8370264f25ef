// Acceptance gate: nine end-to-end criteria, one [PASS]/[FAIL] line each.
// Run all with no arguments, or a single one with --criterion N.
// Exit 0 iff every executed criterion passed.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <limits>
#include <string>
#include <vector>

#include "kernsum/kernsum.hpp"

namespace ks = kernsum;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// 1. Oracle equivalence on randomized instances.

double rel_gap(const std::vector<double>& fast, const std::vector<double>& slow) {
  double scale = 0.0, gap = 0.0;
  for (std::size_t i = 0; i < fast.size(); ++i) {
    scale = std::max(scale, std::fabs(slow[i]));
    gap = std::max(gap, std::fabs(fast[i] - slow[i]));
  }
  return gap / std::max(scale, 1e-300);
}

bool criterion1() {
  ks::Rng master(101);
  const ks::KernelId kernels[4] = {ks::KernelId::epanechnikov, ks::KernelId::triangular,
                                   ks::KernelId::quartic, ks::KernelId::gaussian};
  const std::vector<ks::RegressionFunction> truths = {
      ks::RegressionFunction::logistic(1.0, 3.0), ks::RegressionFunction::rational(3.0),
      ks::RegressionFunction::polynomial({0.0, 1.0, 0.01}),
      ks::RegressionFunction::power(1.0, 1.0, 0.5)};

  double worst_v = 0.0, worst_s = 0.0, worst_nw = 0.0;
  for (int i = 0; i < 200; ++i) {
    const std::int64_t n = 128 + static_cast<std::int64_t>(master.uniform01() * 3968.0);
    const std::uint64_t seed = ks::derive_seed(9000, 1, static_cast<std::uint64_t>(i));
    ks::Path p;
    bool stationary = true;
    switch (i % 5) {
      case 0: p = ks::gen_random_walk(n, {}, seed); stationary = false; break;
      case 1: p = ks::gen_mixing_ar(n, 0.7, {}, seed); break;
      case 2: p = ks::gen_tar(n, 0.3, -0.6, {}, seed); break;
      case 3: p = ks::gen_linear_process(n, ks::CoefFamily::geo(0.5), {}, 1e-8, seed); break;
      default: p = ks::gen_arch(n, 0.4, 0.5, {}, seed); break;
    }
    const ks::Kernel kernel = ks::Kernel::make(kernels[i % 4]);
    const double h = 0.15 + 0.85 * master.uniform01();
    const double bound = stationary ? 2.0 + 4.0 * master.uniform01() : 5.0 + 30.0 * master.uniform01();
    const ks::UniformGrid g = ks::UniformGrid::over(bound, 2.0 * bound / 256.0);

    ks::Rng noise(ks::derive_seed(seed, 7, 0));
    std::vector<double> u(p.n()), y(p.n());
    const ks::RegressionFunction& m = truths[i % truths.size()];
    for (std::size_t t = 0; t < p.n(); ++t) {
      u[t] = noise.normal();
      y[t] = m(p.values[t]) + 0.3 * u[t];
    }

    worst_v = std::max(worst_v, rel_gap(ks::variance_sum(p, kernel, h, g),
                                        ks::variance_sum_naive(p, kernel, h, g)));
    worst_s = std::max(worst_s, rel_gap(ks::martingale_sum(p, u, kernel, h, g),
                                        ks::martingale_sum_naive(p, u, kernel, h, g)));

    const ks::NWFit fit = ks::nw_fit(p, y, kernel, h, g);
    for (std::int64_t j = 0; j < g.count; ++j) {
      const auto idx = static_cast<std::size_t>(j);
      if (!fit.defined[idx]) continue;
      const double yj = g.point(j);
      ks::KahanSum num, den;
      for (std::size_t t = 0; t < p.n(); ++t) {
        const double w = kernel((p.values[t] - yj) / h);
        den.add(w);
        num.add(y[t] * w);
      }
      const double ref = num.value() / den.value();
      worst_nw = std::max(worst_nw, std::fabs(fit.estimate[idx] - ref) /
                                        std::max(1.0, std::fabs(ref)));
    }
  }
  std::printf("    worst relative gaps: V %.2e, S %.2e, NW %.2e over 200 instances\n", worst_v,
              worst_s, worst_nw);
  return worst_v < 1e-10 && worst_s < 1e-10 && worst_nw < 1e-10;
}

// ---------------------------------------------------------------------------
// 2 & 3. Rate fits of raw sup V medians against the theoretical scale.

ks::RateFit raw_sup_fit(const ks::ExperimentConfig& cfg, const ks::ResultTable& table,
                        const std::vector<double>& xs) {
  // rows hold sup V / c_n; medians commute with the positive per-n rescale
  ks::ResultTable raw = table;
  for (ks::Row& r : raw.rows) {
    const double n = static_cast<double>(r.n);
    r.value *= cfg.profile.c_n(n, cfg.bandwidth.h(n));
  }
  return ks::fit_rate_against(raw, xs);
}

bool criterion2() {
  bool ok = true;
  int idx = 0;
  for (const char* name : {"stationary-ar", "stationary-tar", "stationary-linear"}) {
    ks::ExperimentConfig cfg = ks::preset(name);
    cfg.base_seed = 200 + static_cast<std::uint64_t>(idx++);
    const ks::ResultTable table = ks::run_experiment(cfg);
    std::vector<double> xs;
    for (std::int64_t n : cfg.n_grid)
      xs.push_back(static_cast<double>(n) * cfg.bandwidth.h(static_cast<double>(n)));
    const ks::RateFit fit = raw_sup_fit(cfg, table, xs);
    const bool pass = fit.slope >= 0.85 && fit.slope <= 1.15 && fit.r_squared >= 0.95;
    std::printf("    %-18s slope %.4f  r2 %.5f  -> %s\n", name, fit.slope, fit.r_squared,
                pass ? "ok" : "OUT OF RANGE");
    ok = ok && pass;
  }
  return ok;
}

bool criterion3() {
  ks::ExperimentConfig cfg = ks::preset("T2.3-upper");
  cfg.base_seed = 3;
  std::printf("    sweeping n in [2^10, 2^17], 500 replicates (the long haul: ~20-40 min)\n");
  std::fflush(stdout);
  const ks::ResultTable table = ks::run_experiment(cfg);
  std::vector<double> xs;
  for (std::int64_t n : cfg.n_grid)
    xs.push_back(std::sqrt(static_cast<double>(n)) * cfg.bandwidth.h(static_cast<double>(n)));
  const ks::RateFit fit = raw_sup_fit(cfg, table, xs);
  std::printf("    slope %.4f  r2 %.5f (want slope in [0.85, 1.15], r2 >= 0.9)\n", fit.slope,
              fit.r_squared);
  return fit.slope >= 0.85 && fit.slope <= 1.15 && fit.r_squared >= 0.9;
}

// ---------------------------------------------------------------------------
// 4. Lower bound: the reciprocal inf ratio stays bounded on b = 0.1 sqrt(n),
//    and b = 3 sqrt(n) produces exact-zero infima (positive local-time mass
//    at zero away from the origin).

bool criterion4() {
  ks::ExperimentConfig cfg = ks::preset("C2.1-lower");
  cfg.base_seed = 4;
  cfg.n_grid = {std::int64_t{1} << 12, std::int64_t{1} << 17};
  const ks::ResultTable table = ks::run_experiment(cfg);

  double pct[2] = {0.0, 0.0};
  double zero_frac[2] = {0.0, 0.0};
  bool enough = true;
  for (int i = 0; i < 2; ++i) {
    std::vector<double> finite;
    int infs = 0;
    for (int r = 0; r < cfg.replicates; ++r) {
      const double v = table.rows[static_cast<std::size_t>(i * cfg.replicates + r)].value;
      if (std::isinf(v)) ++infs;
      else finite.push_back(v);
    }
    zero_frac[i] = static_cast<double>(infs) / cfg.replicates;
    enough = enough && finite.size() >= 100;
    pct[i] = finite.empty() ? std::numeric_limits<double>::infinity()
                            : ks::percentile(finite, 0.9);
    std::printf("    n = 2^%d: finite-part 90th pct %.4f, inf V = 0 in %.1f%% of replicates\n",
                i == 0 ? 12 : 17, pct[i], 100.0 * zero_frac[i]);
  }
  const bool bounded = enough && pct[1] <= 2.0 * pct[0];
  std::printf("    cross-n percentile ratio %.3f (want <= 2)\n", pct[1] / pct[0]);

  ks::ExperimentConfig wide = cfg;
  wide.grid = ks::GridSpec::scaled_sqrt(3.0);
  wide.n_grid = {std::int64_t{1} << 12};
  const ks::ResultTable wt = ks::run_experiment(wide);
  int infs = 0;
  for (const ks::Row& r : wt.rows) infs += std::isinf(r.value) ? 1 : 0;
  const double wf = static_cast<double>(infs) / wide.replicates;
  std::printf("    b = 3 sqrt(n): inf V = 0 in %.1f%% of replicates (want > 0)\n", 100.0 * wf);
  return bounded && wf > 0.0;
}

// ---------------------------------------------------------------------------
// 5. Martingale sup medians are flat across n under the rate normalization.

bool criterion5() {
  bool ok = true;
  int idx = 0;
  for (const char* name : {"T2.1", "T2.1-rw"}) {
    for (int endo = 0; endo < 2; ++endo) {
      ks::ExperimentConfig cfg = ks::preset(name);
      if (endo) cfg.errors = ks::ErrorSpec::endogenous_sin(ks::InnovationDist{}, cfg.errors.p);
      cfg.base_seed = 500 + static_cast<std::uint64_t>(idx++);
      const ks::ResultTable table = ks::run_experiment(cfg);
      const std::vector<double> med = table.medians_per_n();
      double lo = med.front(), hi = med.front();
      for (double m : med) {
        lo = std::min(lo, m);
        hi = std::max(hi, m);
      }
      const bool pass = hi / lo < 3.0;
      std::printf("    %-8s %-10s median band [%.4f, %.4f], ratio %.3f -> %s\n", name,
                  endo ? "endogenous" : "exogenous", lo, hi, hi / lo, pass ? "ok" : "TOO WIDE");
      std::fflush(stdout);
      ok = ok && pass;
    }
  }
  return ok;
}

// ---------------------------------------------------------------------------
// 6. NW uniform-error rate fit.

bool criterion6() {
  ks::ExperimentConfig cfg = ks::preset("T3.1");
  cfg.base_seed = 999;  // committed before the first run of this criterion
  const ks::ResultTable table = ks::run_experiment(cfg);
  const ks::RateFit fit = ks::fit_rate(table);
  std::printf("    medians:");
  for (std::size_t i = 0; i < fit.medians.size(); ++i)
    std::printf(" %.4f", fit.medians[i]);
  std::printf("\n    slope %.4f  r2 %.4f (want slope in [-0.25, -0.08], r2 >= 0.8)\n", fit.slope,
              fit.r_squared);
  return fit.slope >= -0.25 && fit.slope <= -0.08 && fit.r_squared >= 0.8;
}

// ---------------------------------------------------------------------------
// 7. Split-chain correctness and the crossing proxy.

bool criterion7() {
  bool ok = true;

  {  // (a) marginal law against the unsplit chain
    const auto [sp, rec] = ks::gen_split_chain(30000, ks::make_ar1_split_chain(0.5), 71);
    const ks::Path direct = ks::gen_mixing_ar(30000, 0.5, {}, 72);
    std::vector<double> a(sp.values.begin() + 200, sp.values.end());
    std::vector<double> b(direct.values.begin() + 200, direct.values.end());
    const double d = ks::ks_statistic_two_sample(a, b);
    const double p = ks::ks_pvalue_two_sample(d, a.size(), b.size());
    std::printf("    marginal KS: D %.4f, p %.3f (no rejection at 0.01)\n", d, p);
    ok = ok && p >= 0.01;

    // (b) regeneration blocks are i.i.d.
    const ks::BlockFunctionals bf =
        ks::block_functionals(sp, rec, ks::Kernel::make(ks::KernelId::epanechnikov), 0.5, 0.0);
    const std::size_t half = bf.blocks.size() / 2;
    std::vector<double> b1(bf.blocks.begin(), bf.blocks.begin() + half);
    std::vector<double> b2(bf.blocks.begin() + half, bf.blocks.end());
    const double db = ks::ks_statistic_two_sample(b1, b2);
    const double pb = ks::ks_pvalue_two_sample(db, b1.size(), b2.size());
    std::printf("    block-iid KS: D %.4f, p %.3f over %zu blocks\n", db, pb, bf.blocks.size());
    ok = ok && pb >= 0.01;
  }

  {  // (c) positive-recurrent exponent
    const auto [sp, rec] = ks::gen_split_chain(200000, ks::make_ar1_split_chain(0.5), 73);
    const ks::HarrisProfile prof = ks::estimate_beta(rec, ks::default_checkpoints(sp.n()));
    std::printf("    split-chain beta_hat %.4f (want [0.9, 1.1])\n", prof.beta_hat);
    ok = ok && prof.beta_hat >= 0.9 && prof.beta_hat <= 1.1;
  }

  {  // (d) random-walk crossing proxy at n = 10^6, counts pooled over walks
    const std::int64_t n = 1000000;
    const auto cps = ks::default_checkpoints(n);
    std::vector<double> pooled(cps.size(), 0.0);
    for (int w = 0; w < 64; ++w) {
      const ks::Path p = ks::gen_random_walk(n, {}, ks::derive_seed(74, w, 0));
      const ks::RegenRecord rec = ks::zero_crossing_record(p);
      for (std::size_t i = 0; i < cps.size(); ++i)
        pooled[i] += static_cast<double>(rec.n_of(cps[i]));
    }
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < cps.size(); ++i) {
      lx.push_back(std::log(static_cast<double>(cps[i])));
      ly.push_back(std::log(pooled[i]));
    }
    const ks::LinearFit f = ks::ols(lx, ly);
    std::printf("    crossing-proxy beta_hat %.4f pooled over 64 walks (want [0.4, 0.6])\n",
                f.slope);
    ok = ok && f.slope >= 0.4 && f.slope <= 0.6;
  }
  return ok;
}

// ---------------------------------------------------------------------------
// 8. Local-time comparison at n = 10^4.

bool criterion8() {
  const std::int64_t n = 10000;
  const double h = std::pow(static_cast<double>(n), -0.2);
  const ks::Kernel k = ks::Kernel::make(ks::KernelId::epanechnikov);
  const ks::LocalTimeReport at0 = ks::local_time_comparison(n, h, k, 2000, 81);
  std::printf("    level 0: KS D %.4f, p %.4f, stat mean %.3f, oracle mean %.3f\n",
              at0.ks_distance, at0.p_value, at0.stat_mean, at0.oracle_mean);
  const bool no_reject = at0.p_value >= 0.01;

  const double shift = 2.0 * std::sqrt(static_cast<double>(n));
  const ks::LocalTimeReport atS = ks::local_time_comparison(n, h, k, 2000, 81, shift);
  std::printf("    level 2 sqrt(n): near-zero fraction %.3f vs oracle-at-0 %.3f\n",
              atS.near_zero_frac_stat, at0.near_zero_frac_oracle);
  const bool mass_at_zero = atS.near_zero_frac_stat >= at0.near_zero_frac_oracle - 0.02;
  return no_reject && mass_at_zero;
}

// ---------------------------------------------------------------------------
// 9. Exact identities.

bool criterion9() {
  bool ok = true;

  {  // decomposition identity
    const ks::Path p = ks::gen_mixing_ar(900, 0.7, {}, 91);
    ks::Rng rng(92);
    const auto truth = ks::RegressionFunction::logistic(1.0, 3.0);
    std::vector<double> u(p.n()), y(p.n());
    for (std::size_t t = 0; t < p.n(); ++t) {
      u[t] = 0.5 * rng.normal();
      y[t] = truth(p.values[t]) + u[t];
    }
    const ks::Kernel k = ks::Kernel::make(ks::KernelId::epanechnikov);
    const ks::UniformGrid g = ks::UniformGrid::over(2.5, 0.05);
    const ks::ErrorDecomposition dec = ks::error_decomposition(p, y, u, truth, k, 0.4, g);
    const ks::NWFit fit = ks::nw_fit(p, y, k, 0.4, g);
    double worst = 0.0;
    for (std::int64_t j = 0; j < g.count; ++j) {
      const auto idx = static_cast<std::size_t>(j);
      if (!dec.defined[idx]) continue;
      const double total = fit.estimate[idx] - truth(g.point(j));
      worst = std::max(worst, std::fabs(dec.theta1[idx] + dec.theta2[idx] - total) /
                                  std::max(1.0, std::fabs(total)));
    }
    std::printf("    Theta1 + Theta2 vs m-hat - m: worst gap %.2e (want < 1e-10)\n", worst);
    ok = ok && worst < 1e-10;
  }

  {  // block reconstruction
    const auto [sp, rec] = ks::gen_split_chain(30000, ks::make_ar1_split_chain(0.5), 93);
    const ks::Kernel k = ks::Kernel::make(ks::KernelId::epanechnikov);
    const ks::BlockFunctionals bf = ks::block_functionals(sp, rec, k, 0.3, 0.7);
    const ks::UniformGrid at{0.7, 1.0, 1};
    const double direct = ks::variance_sum(sp, k, 0.3, at)[0];
    const double gap = std::fabs(bf.total() - direct) / std::max(1.0, std::fabs(direct));
    std::printf("    block reconstruction of V: relative gap %.2e (want < 1e-12)\n", gap);
    ok = ok && gap < 1e-12;
  }

  {  // constant response
    const ks::Path p = ks::gen_random_walk(600, {}, 94);
    const ks::Kernel k = ks::Kernel::make(ks::KernelId::epanechnikov);
    const ks::UniformGrid g = ks::UniformGrid::over(12.0, 0.4);
    std::vector<double> y8(p.n(), 8.0), y7(p.n(), 7.0);
    const ks::NWFit f8 = ks::nw_fit(p, y8, k, 0.5, g);
    const ks::NWFit f7 = ks::nw_fit(p, y7, k, 0.5, g);
    bool exact8 = true;
    double worst7 = 0.0;
    for (std::size_t j = 0; j < f8.estimate.size(); ++j) {
      if (f8.defined[j]) exact8 = exact8 && f8.estimate[j] == 8.0;
      if (f7.defined[j]) worst7 = std::max(worst7, std::fabs(f7.estimate[j] - 7.0) / 7.0);
    }
    std::printf("    constant response: y=8 bit-exact %s, y=7 worst rel %.2e\n",
                exact8 ? "yes" : "NO", worst7);
    ok = ok && exact8 && worst7 < 1e-13;
  }
  return ok;
}

struct Criterion {
  int id;
  const char* title;
  bool (*run)();
};

const Criterion kCriteria[] = {
    {1, "oracle equivalence on 200 randomized instances", criterion1},
    {2, "stationary sup V scales like n h", criterion2},
    {3, "random-walk sup V scales like sqrt(n) h", criterion3},
    {4, "random-walk inf V reciprocal stays bounded; wide ranges hit zero", criterion4},
    {5, "martingale sup medians flat under the rate normalization", criterion5},
    {6, "NW uniform error shrinks at the fitted rate", criterion6},
    {7, "split chain: marginals, iid blocks, regeneration exponents", criterion7},
    {8, "occupation statistic matches the local-time oracle", criterion8},
    {9, "exact identities (decomposition, blocks, constants)", criterion9},
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: acceptance [--criterion N]\n");
      return 2;
    }
  }
  if (only < 0 || only > 9) {
    std::fprintf(stderr, "usage: acceptance [--criterion N] with N in 1..9\n");
    return 2;
  }

  bool all_ok = true;
  for (const Criterion& c : kCriteria) {
    if (only != 0 && c.id != only) continue;
    std::printf("criterion %d: %s\n", c.id, c.title);
    std::fflush(stdout);
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    try {
      ok = c.run();
    } catch (const std::exception& e) {
      std::printf("    threw: %s\n", e.what());
    }
    std::printf("[%s] criterion %d (%.1f s)\n", ok ? "PASS" : "FAIL", c.id, seconds_since(t0));
    std::fflush(stdout);
    all_ok = all_ok && ok;
  }
  return all_ok ? 0 : 1;
}
