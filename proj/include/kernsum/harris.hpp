#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "kernsum/kernels.hpp"
#include "kernsum/path.hpp"
#include "kernsum/processes.hpp"
#include "kernsum/rng.hpp"
#include "kernsum/split_chain.hpp"
#include "kernsum/stats.hpp"

namespace kernsum {

struct not_enough_data : std::runtime_error {
  explicit not_enough_data(const std::string& what) : std::runtime_error(what) {}
};

// Estimated regularity index of the regeneration counts: N(n) grows like
// n^beta (beta = 1 for positive recurrent chains, 1/2 for the random walk).
struct HarrisProfile {
  double beta_hat = 0.0;
  double beta_se = 0.0;
};

// Geometric checkpoints n * 2^{-i}, i = 0..6 (equal leverage in log space).
inline std::vector<std::int64_t> default_checkpoints(std::int64_t n) {
  std::vector<std::int64_t> out;
  for (int i = 6; i >= 0; --i) out.push_back(n >> i);
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Least-squares slope of log N(n_i) on log n_i.  Checkpoints with no
// regenerations yet are dropped; at least 3 informative checkpoints and
// N >= 10 at the largest one are required.
inline HarrisProfile estimate_beta(const RegenRecord& record,
                                   const std::vector<std::int64_t>& checkpoints) {
  if (checkpoints.size() < 3) throw std::invalid_argument("estimate_beta: needs >= 3 checkpoints");
  std::vector<std::int64_t> cps = checkpoints;
  std::sort(cps.begin(), cps.end());
  if (record.n_of(cps.back()) < 10)
    throw not_enough_data("estimate_beta: fewer than 10 regenerations at the largest checkpoint");

  std::vector<double> lx, ly;
  for (std::int64_t m : cps) {
    const std::int64_t cnt = record.n_of(m);
    if (cnt < 1) continue;
    lx.push_back(std::log(static_cast<double>(m)));
    ly.push_back(std::log(static_cast<double>(cnt)));
  }
  if (lx.size() < 3) throw not_enough_data("estimate_beta: fewer than 3 informative checkpoints");

  const LinearFit f = ols(lx, ly);
  HarrisProfile h{f.slope, f.slope_se};
  if (!(h.beta_hat > 0.0) || h.beta_hat > 1.0 + 3.0 * h.beta_se + 1e-12)
    throw std::runtime_error("estimate_beta: estimate outside the plausible range (0, 1 + 3 se]");
  return h;
}

// Zero-level-crossing regeneration proxy for a random walk: a crossing of 0
// is flagged whenever consecutive values change sign.  Crossing counts grow
// like sqrt(n), so the proxy carries the walk's regularity index.
inline RegenRecord zero_crossing_record(const Path& path) {
  std::vector<std::uint8_t> y(path.n(), 0);
  for (std::size_t t = 1; t < path.n(); ++t) {
    const bool was_neg = path.values[t - 1] < 0.0;
    const bool is_neg = path.values[t] < 0.0;
    if (was_neg != is_neg) y[t] = 1;
  }
  return RegenRecord::from_indicators(std::move(y));
}

// Kernel-square sums per regeneration block:
// Z_j(x) = sum_{k=rho_{j-1}+1}^{rho_j} f^2((x_k + x)/h), plus the partial
// block after the last regeneration.  Complete blocks + tail reproduce the
// whole-path sum exactly (no gaps, no overlaps).
struct BlockFunctionals {
  std::vector<double> blocks;
  double tail = 0.0;

  double total() const {
    KahanSum k;
    for (double z : blocks) k.add(z);
    k.add(tail);
    return k.value();
  }
};

inline BlockFunctionals block_functionals(const Path& path, const RegenRecord& record,
                                          const Kernel& kernel, double h, double x) {
  if (!(h > 0.0)) throw std::invalid_argument("block_functionals: h must be positive");
  record.validate(path.n());
  BlockFunctionals out;
  out.blocks.reserve(record.rho.size());
  const double inv_h = 1.0 / h;
  std::int64_t start = 1;  // 1-based block start
  for (std::int64_t end : record.rho) {
    KahanSum k;
    for (std::int64_t t = start; t <= end; ++t)
      k.add(kernel.sq((path.values[static_cast<std::size_t>(t - 1)] + x) * inv_h));
    out.blocks.push_back(k.value());
    start = end + 1;
  }
  KahanSum k;
  for (std::int64_t t = start; t <= static_cast<std::int64_t>(path.n()); ++t)
    k.add(kernel.sq((path.values[static_cast<std::size_t>(t - 1)] + x) * inv_h));
  out.tail = k.value();
  return out;
}

// Side-by-side comparison of the normalized kernel-square sum at a point
// against an independently simulated Brownian local-time oracle.
//
// Statistic per replicate: T_r = V_n(shift) / (sqrt(n) h integral(f^2)).
// Oracle per replicate: zero-crossing count C of a 10n-step walk scaled by
// sqrt(10n) and the walk's own mean |increment| - no closed-form constant
// enters; the oracle calibrates itself.
struct LocalTimeReport {
  double ks_distance = 0.0;
  double p_value = 0.0;
  double stat_mean = 0.0;
  double oracle_mean = 0.0;
  double near_zero_frac_stat = 0.0;
  double near_zero_frac_oracle = 0.0;
  double shift = 0.0;
  int replicates = 0;
  bool small_bandwidth_warning = false;
};

inline LocalTimeReport local_time_comparison(std::int64_t n, double h, const Kernel& kernel,
                                             int replicates, std::uint64_t seed,
                                             double shift = 0.0) {
  if (n < 2) throw std::invalid_argument("local_time_comparison: n must be >= 2");
  if (!(h > 0.0)) throw std::invalid_argument("local_time_comparison: h must be positive");
  if (replicates < 100)
    throw not_enough_data("local_time_comparison: needs at least 100 replicates");

  LocalTimeReport rep;
  rep.shift = shift;
  rep.replicates = replicates;
  rep.small_bandwidth_warning = std::sqrt(static_cast<double>(n)) * h < 10.0;

  const double norm = std::sqrt(static_cast<double>(n)) * h * kernel.square_integral;
  const double inv_h = 1.0 / h;
  std::vector<double> stat(static_cast<std::size_t>(replicates));
  std::vector<double> oracle(static_cast<std::size_t>(replicates));
  InnovationDist gauss{InnovationKind::gaussian};

  for (int r = 0; r < replicates; ++r) {
    {
      Rng rng(derive_seed(seed, 1, static_cast<std::uint64_t>(r)));
      double x = 0.0;
      KahanSum v;
      for (std::int64_t t = 0; t < n; ++t) {
        x += gauss.draw(rng);
        v.add(kernel.sq((x + shift) * inv_h));
      }
      stat[static_cast<std::size_t>(r)] = v.value() / norm;
    }
    {
      Rng rng(derive_seed(seed, 2, static_cast<std::uint64_t>(r)));
      const std::int64_t m = 10 * n;
      double x = 0.0;
      double abs_sum = 0.0;
      std::int64_t crossings = 0;
      bool was_neg = false;
      for (std::int64_t t = 0; t < m; ++t) {
        const double e = gauss.draw(rng);
        x += e;
        abs_sum += std::fabs(e);
        const bool is_neg = x < 0.0;
        if (t > 0 && is_neg != was_neg) ++crossings;
        was_neg = is_neg;
      }
      const double mean_abs = abs_sum / static_cast<double>(m);
      oracle[static_cast<std::size_t>(r)] =
          static_cast<double>(crossings) / (std::sqrt(static_cast<double>(m)) * mean_abs);
    }
  }

  rep.stat_mean = mean(stat);
  rep.oracle_mean = mean(oracle);
  rep.ks_distance = ks_statistic_two_sample(stat, oracle);
  rep.p_value = ks_pvalue_two_sample(rep.ks_distance, stat.size(), oracle.size());
  int nz_s = 0, nz_o = 0;
  for (double v : stat) nz_s += (v <= 1e-12);
  for (double v : oracle) nz_o += (v <= 1e-12);
  rep.near_zero_frac_stat = static_cast<double>(nz_s) / replicates;
  rep.near_zero_frac_oracle = static_cast<double>(nz_o) / replicates;
  return rep;
}

}  // namespace kernsum
