#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "kernsum/grid.hpp"
#include "kernsum/kernels.hpp"
#include "kernsum/path.hpp"
#include "kernsum/stats.hpp"

namespace kernsum {

// Path values sorted ascending with any weight columns carried through the
// same permutation.  Sorting once turns every kernel window into a
// contiguous index range.
struct SortedPath {
  std::vector<double> x;
  std::vector<std::vector<double>> cols;

  static SortedPath from(const std::vector<double>& values,
                         const std::vector<const std::vector<double>*>& weights = {}) {
    SortedPath s;
    std::vector<std::uint32_t> idx(values.size());
    std::iota(idx.begin(), idx.end(), 0u);
    std::sort(idx.begin(), idx.end(),
              [&](std::uint32_t a, std::uint32_t b) { return values[a] < values[b]; });
    s.x.resize(values.size());
    for (std::size_t i = 0; i < idx.size(); ++i) s.x[i] = values[idx[i]];
    s.cols.reserve(weights.size());
    for (const auto* w : weights) {
      if (w->size() != values.size())
        throw std::invalid_argument("weight column length does not match path length");
      std::vector<double> col(values.size());
      for (std::size_t i = 0; i < idx.size(); ++i) col[i] = (*w)[idx[i]];
      s.cols.push_back(std::move(col));
    }
    return s;
  }
};

namespace detail {

// Compensated block accumulation: plain partial sums over blocks of 64
// elements, Kahan-combined.  Keeps the error a few ulps of sum|terms| while
// letting the inner loop vectorize.
inline constexpr std::size_t acc_block = 64;

// Walk windows [c - r, c + r] over a non-decreasing sequence of centers
// center(k), k in [0, count).  Both endpoints advance monotonically, so the
// whole sweep is O(n + count).  Centers are computed exactly per point (not
// incrementally) so results match per-point evaluation bit-for-bit.
template <class Center, class Cb>
inline void sweep_windows(const std::vector<double>& xs, double radius, std::int64_t count,
                          Center&& center, Cb&& cb) {
  const std::size_t n = xs.size();
  std::size_t lo = 0, hi = 0;
  for (std::int64_t k = 0; k < count; ++k) {
    const double c = center(k);
    const double wlo = c - radius, whi = c + radius;
    while (lo < n && xs[lo] < wlo) ++lo;
    if (hi < lo) hi = lo;
    while (hi < n && xs[hi] <= whi) ++hi;
    cb(k, lo, hi, c);
  }
}

template <class Term>
inline double window_sum(std::size_t lo, std::size_t hi, Term&& term) {
  KahanSum outer;
  std::size_t i = lo;
  while (i < hi) {
    const std::size_t end = std::min(hi, i + acc_block);
    double block = 0.0;
    for (; i < end; ++i) block += term(i);
    outer.add(block);
  }
  return outer.value();
}

// Index range of grid points whose kernel window can intersect the sorted
// path values; everything outside sums to exactly zero.
struct ActiveRange {
  std::int64_t begin = 0;
  std::int64_t end = 0;  // half-open
};

inline ActiveRange active_grid_range(const UniformGrid& g, double center_lo, double center_hi,
                                     bool centers_are_negated_grid) {
  // For V/S the window center at grid point y is -y; for regression it is +y.
  double ylo, yhi;
  if (centers_are_negated_grid) {
    ylo = -center_hi;
    yhi = -center_lo;
  } else {
    ylo = center_lo;
    yhi = center_hi;
  }
  ActiveRange r;
  if (g.step <= 0.0) {
    r.begin = 0;
    r.end = g.count;
    return r;
  }
  // clamp in double space first: the raw indices can overflow int64
  const double cnt = static_cast<double>(g.count);
  const double fb = std::clamp(std::floor((ylo - g.lo) / g.step), 0.0, cnt);
  const double fe = std::clamp(std::ceil((yhi - g.lo) / g.step) + 1.0, 0.0, cnt);
  r.begin = static_cast<std::int64_t>(fb);
  r.end = static_cast<std::int64_t>(fe);
  if (r.end < r.begin) r.end = r.begin;
  return r;
}

// Per-kernel functors so the hot loops inline the closed forms.
struct EpaSq {
  double operator()(double s) const {
    const double q = 1.0 - s * s;
    return q > 0.0 ? 0.5625 * q * q : 0.0;
  }
};
struct TriSq {
  double operator()(double s) const {
    const double q = 1.0 - std::fabs(s);
    return q > 0.0 ? q * q : 0.0;
  }
};
struct QuarSq {
  double operator()(double s) const {
    const double q = 1.0 - s * s;
    const double v = q > 0.0 ? 0.9375 * q * q : 0.0;
    return v * v;
  }
};
struct GaussSq {
  double operator()(double s) const {
    const double v = 0.39894228040143267794 * std::exp(-0.5 * s * s);
    return v * v;
  }
};
struct EpaF {
  double operator()(double s) const {
    const double q = 1.0 - s * s;
    return q > 0.0 ? 0.75 * q : 0.0;
  }
};
struct TriF {
  double operator()(double s) const {
    const double q = 1.0 - std::fabs(s);
    return q > 0.0 ? q : 0.0;
  }
};
struct QuarF {
  double operator()(double s) const {
    const double q = 1.0 - s * s;
    return q > 0.0 ? 0.9375 * q * q : 0.0;
  }
};
struct GaussF {
  double operator()(double s) const { return 0.39894228040143267794 * std::exp(-0.5 * s * s); }
};

template <class FSq, class Visit>
inline void visit_variance(const std::vector<double>& xs, double h, const UniformGrid& g,
                           double radius, Visit&& visit) {
  // V(y_j) has window center -y_j; sweep centers ascending = grid descending.
  const FSq fsq;
  const double inv_h = 1.0 / h;
  const ActiveRange act = active_grid_range(
      g, xs.front() - radius * h, xs.back() + radius * h, /*centers_are_negated_grid=*/true);
  const std::int64_t m = act.end - act.begin;
  if (m <= 0) return;
  sweep_windows(
      xs, radius * h, m, [&](std::int64_t k) { return -g.point(act.end - 1 - k); },
      [&](std::int64_t k, std::size_t lo, std::size_t hi, double c) {
        const std::int64_t j = act.end - 1 - k;
        const double v =
            window_sum(lo, hi, [&](std::size_t i) { return fsq((xs[i] - c) * inv_h); });
        visit(j, v);
      });
}

template <class F, class Visit>
inline void visit_martingale(const std::vector<double>& xs, const std::vector<double>& u, double h,
                             const UniformGrid& g, double radius, Visit&& visit) {
  const F f;
  const double inv_h = 1.0 / h;
  const ActiveRange act = active_grid_range(
      g, xs.front() - radius * h, xs.back() + radius * h, /*centers_are_negated_grid=*/true);
  const std::int64_t m = act.end - act.begin;
  if (m <= 0) return;
  sweep_windows(
      xs, radius * h, m, [&](std::int64_t k) { return -g.point(act.end - 1 - k); },
      [&](std::int64_t k, std::size_t lo, std::size_t hi, double c) {
        const std::int64_t j = act.end - 1 - k;
        const double v =
            window_sum(lo, hi, [&](std::size_t i) { return u[i] * f((xs[i] - c) * inv_h); });
        visit(j, v);
      });
}

template <class Visit>
inline void dispatch_variance(const std::vector<double>& xs, const Kernel& k, double h,
                              const UniformGrid& g, Visit&& visit) {
  if (!k.compact()) {
    // every grid point sees the whole path
    const GaussSq fsq;
    const double inv_h = 1.0 / h;
    for (std::int64_t j = 0; j < g.count; ++j) {
      const double c = -g.point(j);
      visit(j, window_sum(0, xs.size(),
                          [&](std::size_t i) { return fsq((xs[i] - c) * inv_h); }));
    }
    return;
  }
  switch (k.id) {
    case KernelId::epanechnikov: visit_variance<EpaSq>(xs, h, g, k.support_radius, visit); break;
    case KernelId::triangular: visit_variance<TriSq>(xs, h, g, k.support_radius, visit); break;
    case KernelId::quartic: visit_variance<QuarSq>(xs, h, g, k.support_radius, visit); break;
    case KernelId::gaussian: break;  // handled above
  }
}

template <class Visit>
inline void dispatch_martingale(const std::vector<double>& xs, const std::vector<double>& u,
                                const Kernel& k, double h, const UniformGrid& g, Visit&& visit) {
  if (!k.compact()) {
    const GaussF f;
    const double inv_h = 1.0 / h;
    for (std::int64_t j = 0; j < g.count; ++j) {
      const double c = -g.point(j);
      visit(j, window_sum(0, xs.size(),
                          [&](std::size_t i) { return u[i] * f((xs[i] - c) * inv_h); }));
    }
    return;
  }
  switch (k.id) {
    case KernelId::epanechnikov: visit_martingale<EpaF>(xs, u, h, g, k.support_radius, visit); break;
    case KernelId::triangular: visit_martingale<TriF>(xs, u, h, g, k.support_radius, visit); break;
    case KernelId::quartic: visit_martingale<QuarF>(xs, u, h, g, k.support_radius, visit); break;
    case KernelId::gaussian: break;
  }
}

inline ActiveRange variance_active_range(const std::vector<double>& xs, const Kernel& k, double h,
                                         const UniformGrid& g) {
  if (!k.compact()) return {0, g.count};
  const double r = k.support_radius * h;
  return active_grid_range(g, xs.front() - r, xs.back() + r, true);
}

}  // namespace detail

inline constexpr std::int64_t materialize_cap = std::int64_t{1} << 24;

// V(y_j) = sum_t f^2((x_t + y_j)/h) over the whole grid.  Grid points whose
// window misses every path value are exact zeros.
inline std::vector<double> variance_sum(const Path& path, const Kernel& kernel, double h,
                                        const UniformGrid& grid) {
  if (!(h > 0.0)) throw std::invalid_argument("variance_sum: h must be positive");
  if (grid.count < 1) throw std::invalid_argument("variance_sum: empty grid");
  if (grid.count > materialize_cap)
    throw std::invalid_argument("variance_sum: grid too large to materialize; use the reducers");
  if (path.values.empty()) throw std::invalid_argument("variance_sum: empty path");
  const SortedPath sp = SortedPath::from(path.values);
  std::vector<double> out(static_cast<std::size_t>(grid.count), 0.0);
  detail::dispatch_variance(sp.x, kernel, h, grid,
                            [&](std::int64_t j, double v) { out[static_cast<std::size_t>(j)] = v; });
  return out;
}

// S(y_j) = sum_t u_t f((x_t + y_j)/h).
inline std::vector<double> martingale_sum(const Path& path, const std::vector<double>& u,
                                          const Kernel& kernel, double h,
                                          const UniformGrid& grid) {
  if (!(h > 0.0)) throw std::invalid_argument("martingale_sum: h must be positive");
  if (grid.count < 1) throw std::invalid_argument("martingale_sum: empty grid");
  if (grid.count > materialize_cap)
    throw std::invalid_argument("martingale_sum: grid too large to materialize; use the reducers");
  if (u.size() != path.n())
    throw std::invalid_argument("martingale_sum: weight length does not match path length");
  if (path.values.empty()) throw std::invalid_argument("martingale_sum: empty path");
  const SortedPath sp = SortedPath::from(path.values, {&u});
  std::vector<double> out(static_cast<std::size_t>(grid.count), 0.0);
  detail::dispatch_martingale(sp.x, sp.cols[0], kernel, h, grid,
                              [&](std::int64_t j, double v) { out[static_cast<std::size_t>(j)] = v; });
  return out;
}

// Reference implementations: plain double loop in time order, compensated.
// These are the oracles the fast path is tested against.
inline std::vector<double> variance_sum_naive(const Path& path, const Kernel& kernel, double h,
                                              const UniformGrid& grid) {
  std::vector<double> out(static_cast<std::size_t>(grid.count), 0.0);
  for (std::int64_t j = 0; j < grid.count; ++j) {
    const double y = grid.point(j);
    KahanSum acc;
    for (double x : path.values) acc.add(kernel.sq((x + y) / h));
    out[static_cast<std::size_t>(j)] = acc.value();
  }
  return out;
}

inline std::vector<double> martingale_sum_naive(const Path& path, const std::vector<double>& u,
                                                const Kernel& kernel, double h,
                                                const UniformGrid& grid) {
  if (u.size() != path.n()) throw std::invalid_argument("martingale_sum_naive: length mismatch");
  std::vector<double> out(static_cast<std::size_t>(grid.count), 0.0);
  for (std::int64_t j = 0; j < grid.count; ++j) {
    const double y = grid.point(j);
    KahanSum acc;
    for (std::size_t t = 0; t < u.size(); ++t) acc.add(u[t] * kernel((path.values[t] + y) / h));
    out[static_cast<std::size_t>(j)] = acc.value();
  }
  return out;
}

struct ExtremePoint {
  double value = 0.0;
  std::int64_t index = -1;
  double at = 0.0;  // grid coordinate, when a grid is supplied
};

// max |v| with ties broken toward the smallest grid point.
inline ExtremePoint sup_stat(const std::vector<double>& values, const UniformGrid* grid = nullptr) {
  if (values.empty()) throw std::invalid_argument("sup_stat: empty input");
  ExtremePoint best{-1.0, -1, 0.0};
  for (std::size_t j = 0; j < values.size(); ++j) {
    const double a = std::fabs(values[j]);
    if (a > best.value) {
      best.value = a;
      best.index = static_cast<std::int64_t>(j);
    }
  }
  if (grid) best.at = grid->point(best.index);
  return best;
}

// min v with ties broken toward the smallest grid point; inputs must be
// variance sums, hence nonnegative.
inline ExtremePoint inf_stat(const std::vector<double>& values, const UniformGrid* grid = nullptr) {
  if (values.empty()) throw std::invalid_argument("inf_stat: empty input");
  ExtremePoint best{std::numeric_limits<double>::infinity(), -1, 0.0};
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (values[j] < 0.0)
      throw std::invalid_argument("inf_stat: negative input (expects variance sums)");
    if (values[j] < best.value) {
      best.value = values[j];
      best.index = static_cast<std::int64_t>(j);
    }
  }
  if (grid) best.at = grid->point(best.index);
  return best;
}

// Streaming sup/inf of V over an arbitrarily large grid; grid points with
// empty kernel windows enter as exact zeros without being enumerated.
struct VarianceExtremes {
  ExtremePoint sup;
  ExtremePoint inf;
  std::int64_t active_points = 0;
  std::int64_t inactive_points = 0;
};

inline VarianceExtremes variance_extremes(const Path& path, const Kernel& kernel, double h,
                                          const UniformGrid& grid) {
  if (!(h > 0.0)) throw std::invalid_argument("variance_extremes: h must be positive");
  if (grid.count < 1) throw std::invalid_argument("variance_extremes: empty grid");
  if (path.values.empty()) throw std::invalid_argument("variance_extremes: empty path");
  const SortedPath sp = SortedPath::from(path.values);
  const detail::ActiveRange act = detail::variance_active_range(sp.x, kernel, h, grid);

  VarianceExtremes r;
  r.active_points = act.end - act.begin;
  r.inactive_points = grid.count - r.active_points;
  ExtremePoint sup{-1.0, -1, 0.0}, inf{std::numeric_limits<double>::infinity(), -1, 0.0};
  detail::dispatch_variance(sp.x, kernel, h, grid, [&](std::int64_t j, double v) {
    if (v > sup.value || (v == sup.value && j < sup.index)) sup = {v, j, 0.0};
    if (v < inf.value || (v == inf.value && j < inf.index)) inf = {v, j, 0.0};
  });
  if (r.inactive_points > 0) {
    const std::int64_t j0 = act.begin > 0 ? 0 : act.end;
    if (sup.index < 0 || 0.0 > sup.value || (0.0 == sup.value && j0 < sup.index))
      sup = {0.0, j0, 0.0};
    if (inf.index < 0 || 0.0 < inf.value || (0.0 == inf.value && j0 < inf.index))
      inf = {0.0, j0, 0.0};
  }
  sup.at = grid.point(sup.index);
  inf.at = grid.point(inf.index);
  r.sup = sup;
  r.inf = inf;
  return r;
}

// Streaming sup |S| for several weight columns sharing one path and one
// window sweep (used when exogenous and endogenous errors ride one path).
inline std::vector<ExtremePoint> martingale_sup_multi(const Path& path,
                                                      const std::vector<const std::vector<double>*>& cols,
                                                      const Kernel& kernel, double h,
                                                      const UniformGrid& grid) {
  if (!(h > 0.0)) throw std::invalid_argument("martingale_sup_multi: h must be positive");
  if (grid.count < 1) throw std::invalid_argument("martingale_sup_multi: empty grid");
  if (cols.empty()) throw std::invalid_argument("martingale_sup_multi: no weight columns");
  if (path.values.empty()) throw std::invalid_argument("martingale_sup_multi: empty path");
  const SortedPath sp = SortedPath::from(path.values, cols);
  const detail::ActiveRange act = detail::variance_active_range(sp.x, kernel, h, grid);
  const std::int64_t inactive = grid.count - (act.end - act.begin);

  std::vector<ExtremePoint> best(cols.size(), ExtremePoint{-1.0, -1, 0.0});
  for (std::size_t c = 0; c < cols.size(); ++c) {
    detail::dispatch_martingale(sp.x, sp.cols[c], kernel, h, grid, [&](std::int64_t j, double v) {
      const double a = std::fabs(v);
      if (a > best[c].value || (a == best[c].value && j < best[c].index)) best[c] = {a, j, 0.0};
    });
    if (inactive > 0) {
      const std::int64_t j0 = act.begin > 0 ? 0 : act.end;
      if (best[c].index < 0 || 0.0 > best[c].value || (0.0 == best[c].value && j0 < best[c].index))
        best[c] = {0.0, j0, 0.0};
    }
    best[c].at = grid.point(best[c].index);
  }
  return best;
}

// Normalized boundedness ratios matching the rate statements:
// sup_S / sqrt(c_n log n), sup_V / c_n, and (a(n) h) / inf_V.
struct RatioRecord {
  double sup_s_ratio = 0.0;
  double sup_v_ratio = 0.0;
  double inf_recip_ratio = 0.0;
  bool inf_v_zero = false;
};

inline RatioRecord normalized_ratios(double sup_s, double sup_v, double inf_v, double n, double h,
                                     const NormalizationProfile& profile) {
  if (!(n >= 2.0)) throw std::invalid_argument("normalized_ratios: n must be >= 2");
  if (!(h > 0.0)) throw std::invalid_argument("normalized_ratios: h must be positive");
  const double cn = profile.c_n(n, h);
  RatioRecord r;
  r.sup_s_ratio = sup_s / std::sqrt(cn * std::log(n));
  r.sup_v_ratio = sup_v / cn;
  if (inf_v == 0.0) {
    // legitimate outcome of a too-wide range, reported as +inf rather than thrown
    r.inf_v_zero = true;
    r.inf_recip_ratio = std::numeric_limits<double>::infinity();
  } else {
    r.inf_recip_ratio = profile.a(n) * h / inf_v;
  }
  return r;
}

// Empirical whole-space tail condition: b^{-k0} sum_t |x_t|^{k0} against
// sqrt(c_n log n), plus the companion kernel-decay term
// n * sup_{|x| > b/2} |f(x/h)| (catalog kernels decrease in |s|).
struct TailConditionReport {
  double moment_stat = 0.0;
  double rate = 0.0;
  double moment_ratio = 0.0;
  double kernel_term = 0.0;
  double kernel_ratio = 0.0;
};

inline TailConditionReport tail_condition_check(const Path& path, double b_n, double k0,
                                                double c_n, const Kernel& kernel, double h) {
  if (!(k0 > 0.0)) throw std::invalid_argument("tail_condition_check: k0 must be positive");
  if (!(b_n > 0.0)) throw std::invalid_argument("tail_condition_check: b_n must be positive");
  if (!(h > 0.0)) throw std::invalid_argument("tail_condition_check: h must be positive");
  TailConditionReport r;
  KahanSum acc;
  for (double x : path.values) acc.add(std::pow(std::fabs(x), k0));
  r.moment_stat = std::pow(b_n, -k0) * acc.value();
  const double n = static_cast<double>(path.n());
  r.rate = std::sqrt(c_n * std::log(n));
  r.moment_ratio = r.moment_stat / r.rate;
  r.kernel_term = n * kernel(b_n / (2.0 * h));
  r.kernel_ratio = r.kernel_term / r.rate;
  return r;
}

// Bandwidth/moment-rate compatibility: n c_n^{-p} (log n)^{p-1} must vanish.
// Every profile/bandwidth pair here is an exact power law, so the polynomial
// order is computed analytically; sampling the sequence on a finite n-grid
// cannot tell n^{-0.2} (log n)^3 (legitimate, slowly vanishing) from
// n^{0.4} log n (divergent).  Grid values are kept for diagnostics only.
struct MomentRateReport {
  std::vector<double> values;
  double poly_order = 0.0;  // n-exponent of n c_n^{-p} (log n)^{p-1}
  double log_order = 0.0;   // log n exponent after the polynomial part
  bool pass = false;
};

inline MomentRateReport check_moment_rate(const BandwidthRule& rule,
                                          const NormalizationProfile& profile, int p,
                                          const std::vector<std::int64_t>& n_grid) {
  if (p < 1) throw std::invalid_argument("check_moment_rate: p must be >= 1");
  if (n_grid.empty()) throw std::invalid_argument("check_moment_rate: empty n-grid");
  MomentRateReport r;
  r.values.reserve(n_grid.size());
  for (std::int64_t ni : n_grid) {
    const double n = static_cast<double>(ni);
    const double cn = profile.c_n(n, rule.h(n));
    r.values.push_back(n * std::pow(cn, -p) * std::pow(std::log(n), p - 1));
  }
  const double pd = static_cast<double>(p);
  r.poly_order = 1.0 - pd * (profile.beta_exponent() - rule.gamma);
  r.log_order = (pd - 1.0) - pd * rule.log_exponent;
  r.pass = r.poly_order < 0.0 || (r.poly_order == 0.0 && r.log_order < 0.0);
  return r;
}

}  // namespace kernsum
