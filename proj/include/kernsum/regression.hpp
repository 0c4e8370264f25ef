#pragma once

#include <array>
#include <cfloat>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "kernsum/grid.hpp"
#include "kernsum/kernels.hpp"
#include "kernsum/path.hpp"
#include "kernsum/rng.hpp"
#include "kernsum/sums.hpp"

namespace kernsum {

struct fit_failed : std::runtime_error {
  explicit fit_failed(const std::string& what) : std::runtime_error(what) {}
};

enum class RegressionKind { polynomial, power, rational, logistic };

// Regression-function catalog with stored local Hoelder data:
// |m(y) - m(x)| <= C |y - x|^alpha g(x) whenever |y - x| <= 0.5.
// The envelope g is even and non-decreasing in |x|, so its sup over a
// symmetric grid is its value at the endpoint.
struct RegressionFunction {
  RegressionKind kind = RegressionKind::logistic;
  std::vector<double> theta;      // polynomial coefficients theta_1..theta_k
  double a = 0.0, b = 1.0, g = 1.0;  // power: a + b |x|^g; rational: b x/(1+x^2); logistic: (a, b)

  double operator()(double x) const {
    switch (kind) {
      case RegressionKind::polynomial: {
        double v = 0.0;
        for (std::size_t j = theta.size(); j-- > 0;) v = v * x + theta[j];
        return v;
      }
      case RegressionKind::power:
        return a + b * std::pow(std::fabs(x), g);
      case RegressionKind::rational:
        return b * x / (1.0 + x * x);
      case RegressionKind::logistic: {
        // (a + b e^x) / (1 + e^x), evaluated overflow-free on both tails
        if (x >= 0.0) {
          const double e = std::exp(-x);
          return (a * e + b) / (e + 1.0);
        }
        const double e = std::exp(x);
        return (a + b * e) / (1.0 + e);
      }
    }
    return 0.0;
  }

  double holder_alpha() const {
    switch (kind) {
      case RegressionKind::polynomial: return 1.0;
      case RegressionKind::power: return std::min(g, 1.0);
      case RegressionKind::rational: return 1.0;
      case RegressionKind::logistic: return 1.0;
    }
    return 1.0;
  }

  double holder_C() const {
    switch (kind) {
      case RegressionKind::polynomial: return 1.0;
      case RegressionKind::power: return g <= 1.0 ? std::fabs(b) : std::fabs(b) * g;
      case RegressionKind::rational: return std::fabs(b);
      case RegressionKind::logistic: return std::fabs(b - a) / 4.0;
    }
    return 1.0;
  }

  // Local envelope g(x); constant 1 for the bounded-derivative kinds.
  double envelope(double x) const {
    switch (kind) {
      case RegressionKind::polynomial: {
        double s = 0.0;
        const double base = std::fabs(x) + 1.0;
        double pw = 1.0;
        for (std::size_t j = 2; j <= theta.size(); ++j) {
          s += static_cast<double>(j - 1) * std::fabs(theta[j - 1]) * pw;
          pw *= base;
        }
        return s;
      }
      case RegressionKind::power:
        return g <= 1.0 ? 1.0 : std::pow(std::fabs(x) + 1.0, g - 1.0);
      case RegressionKind::rational: return 1.0;
      case RegressionKind::logistic: return 1.0;
    }
    return 1.0;
  }

  // delta_n = sup of the envelope over the realized grid.
  double envelope_sup(const UniformGrid& grid) const {
    return std::max(envelope(grid.lo), envelope(grid.hi()));
  }

  const char* name() const {
    switch (kind) {
      case RegressionKind::polynomial: return "polynomial";
      case RegressionKind::power: return "power";
      case RegressionKind::rational: return "rational";
      case RegressionKind::logistic: return "logistic";
    }
    return "?";
  }

  static RegressionFunction polynomial(std::vector<double> coeffs) {
    if (coeffs.empty()) throw std::invalid_argument("polynomial needs >= 1 coefficient");
    RegressionFunction f;
    f.kind = RegressionKind::polynomial;
    f.theta = std::move(coeffs);
    return f;
  }
  static RegressionFunction power(double alpha, double beta, double gamma) {
    if (!(gamma > 0.0)) throw std::invalid_argument("power function needs gamma > 0");
    RegressionFunction f;
    f.kind = RegressionKind::power;
    f.a = alpha;
    f.b = beta;
    f.g = gamma;
    return f;
  }
  static RegressionFunction rational(double theta) {
    RegressionFunction f;
    f.kind = RegressionKind::rational;
    f.b = theta;
    return f;
  }
  static RegressionFunction logistic(double alpha, double beta) {
    RegressionFunction f;
    f.kind = RegressionKind::logistic;
    f.a = alpha;
    f.b = beta;
    return f;
  }
};

// Worst sampled ratio |m(y)-m(x)| / (C |y-x|^alpha g(x)) over pairs with
// |y-x| <= 0.5; should not exceed 1 (up to roundoff) for catalog functions.
inline double holder_worst_ratio(const RegressionFunction& m, double range, int n_pairs,
                                 std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  for (int i = 0; i < n_pairs; ++i) {
    const double x = (2.0 * rng.uniform01() - 1.0) * range;
    const double d = (2.0 * rng.uniform01() - 1.0) * 0.5;
    const double y = x + d;
    if (d == 0.0) continue;
    const double bound =
        m.holder_C() * std::pow(std::fabs(d), m.holder_alpha()) * m.envelope(x);
    if (bound > 0.0) worst = std::max(worst, std::fabs(m(y) - m(x)) / bound);
  }
  return worst;
}

namespace detail {

// One sweep computing the raw kernel sum (denominator) and up to three
// weighted sums per grid point, window centers at +y_j.
template <class F, class Visit>
inline void visit_nw(const std::vector<double>& xs, const std::vector<std::vector<double>>& cols,
                     double h, const UniformGrid& grid, double radius, Visit&& visit) {
  const F f;
  const double inv_h = 1.0 / h;
  const std::size_t nc = cols.size();
  const ActiveRange act =
      active_grid_range(grid, xs.front() - radius * h, xs.back() + radius * h, false);
  const std::int64_t m = act.end - act.begin;
  if (m <= 0) return;
  sweep_windows(
      xs, radius * h, m, [&](std::int64_t k) { return grid.point(act.begin + k); },
      [&](std::int64_t k, std::size_t lo, std::size_t hi, double c) {
        KahanSum den;
        std::array<KahanSum, 3> num;
        std::size_t i = lo;
        while (i < hi) {
          const std::size_t end = std::min(hi, i + acc_block);
          double bden = 0.0;
          std::array<double, 3> bnum{0.0, 0.0, 0.0};
          for (; i < end; ++i) {
            const double w = f((xs[i] - c) * inv_h);
            bden += w;
            for (std::size_t cidx = 0; cidx < nc; ++cidx) bnum[cidx] += cols[cidx][i] * w;
          }
          den.add(bden);
          for (std::size_t cidx = 0; cidx < nc; ++cidx) num[cidx].add(bnum[cidx]);
        }
        std::array<double, 3> sums{num[0].value(), num[1].value(), num[2].value()};
        visit(act.begin + k, den.value(), sums);
      });
}

template <class Visit>
inline void dispatch_nw(const std::vector<double>& xs, const std::vector<std::vector<double>>& cols,
                        const Kernel& kernel, double h, const UniformGrid& grid, Visit&& visit) {
  if (cols.size() > 3) throw std::invalid_argument("nw sweep supports at most 3 weight columns");
  if (!kernel.compact()) {
    const GaussF f;
    const double inv_h = 1.0 / h;
    for (std::int64_t j = 0; j < grid.count; ++j) {
      const double c = grid.point(j);
      KahanSum den;
      std::array<KahanSum, 3> num;
      std::size_t i = 0;
      while (i < xs.size()) {
        const std::size_t end = std::min(xs.size(), i + acc_block);
        double bden = 0.0;
        std::array<double, 3> bnum{0.0, 0.0, 0.0};
        for (; i < end; ++i) {
          const double w = f((xs[i] - c) * inv_h);
          bden += w;
          for (std::size_t cidx = 0; cidx < cols.size(); ++cidx) bnum[cidx] += cols[cidx][i] * w;
        }
        den.add(bden);
        for (std::size_t cidx = 0; cidx < cols.size(); ++cidx) num[cidx].add(bnum[cidx]);
      }
      std::array<double, 3> sums{num[0].value(), num[1].value(), num[2].value()};
      visit(j, den.value(), sums);
    }
    return;
  }
  switch (kernel.id) {
    case KernelId::epanechnikov: visit_nw<EpaF>(xs, cols, h, grid, kernel.support_radius, visit); break;
    case KernelId::triangular: visit_nw<TriF>(xs, cols, h, grid, kernel.support_radius, visit); break;
    case KernelId::quartic: visit_nw<QuarF>(xs, cols, h, grid, kernel.support_radius, visit); break;
    case KernelId::gaussian: break;  // handled above
  }
}

}  // namespace detail

// Nadaraya-Watson fit over a grid.  Grid points whose raw kernel mass falls
// below DBL_EPSILON * n are flagged undefined instead of divided; they are
// the range phenomenon, not an error.  Denominator/numerator are stored on
// the K_h = K(./h)/h scale.
struct NWFit {
  UniformGrid grid;
  std::vector<double> estimate;
  std::vector<double> numerator;
  std::vector<double> denominator;
  std::vector<std::uint8_t> defined;
  std::int64_t defined_count = 0;
};

inline NWFit nw_fit(const Path& x, const std::vector<double>& y, const Kernel& kernel, double h,
                    const UniformGrid& grid) {
  if (!(h > 0.0)) throw std::invalid_argument("nw_fit: h must be positive");
  if (y.size() != x.n()) throw std::invalid_argument("nw_fit: response length != path length");
  if (x.values.empty()) throw std::invalid_argument("nw_fit: empty path");
  if (grid.count < 1) throw std::invalid_argument("nw_fit: empty grid");
  if (grid.count > materialize_cap)
    throw std::invalid_argument("nw_fit: grid too large to materialize; use nw_uniform_error");

  const SortedPath sp = SortedPath::from(x.values, {&y});
  NWFit fit;
  fit.grid = grid;
  fit.estimate.assign(static_cast<std::size_t>(grid.count), 0.0);
  fit.numerator.assign(static_cast<std::size_t>(grid.count), 0.0);
  fit.denominator.assign(static_cast<std::size_t>(grid.count), 0.0);
  fit.defined.assign(static_cast<std::size_t>(grid.count), 0);

  const double thresh = DBL_EPSILON * static_cast<double>(x.n());
  detail::dispatch_nw(sp.x, sp.cols, kernel, h, grid,
                      [&](std::int64_t j, double den_raw, const std::array<double, 3>& num_raw) {
                        const auto idx = static_cast<std::size_t>(j);
                        fit.denominator[idx] = den_raw / h;
                        fit.numerator[idx] = num_raw[0] / h;
                        if (den_raw > thresh) {
                          fit.defined[idx] = 1;
                          fit.estimate[idx] = num_raw[0] / den_raw;
                          ++fit.defined_count;
                        }
                      });
  if (fit.defined_count == 0)
    throw fit_failed("nw_fit: every grid point has an empty kernel window (range too wide)");
  return fit;
}

struct UniformErrorResult {
  double sup_error = 0.0;
  std::int64_t index = -1;
  double at = 0.0;
  double fraction_undefined = 0.0;
  std::int64_t defined_count = 0;
};

// sup over defined grid points of |m-hat - m|, from a materialized fit.
inline UniformErrorResult uniform_error(const NWFit& fit, const RegressionFunction& truth) {
  UniformErrorResult r;
  for (std::size_t j = 0; j < fit.estimate.size(); ++j) {
    if (!fit.defined[j]) continue;
    ++r.defined_count;
    const double e = std::fabs(fit.estimate[j] - truth(fit.grid.point(static_cast<std::int64_t>(j))));
    if (r.index < 0 || e > r.sup_error) {
      r.sup_error = e;
      r.index = static_cast<std::int64_t>(j);
    }
  }
  if (r.defined_count == 0) throw std::invalid_argument("uniform_error: no defined grid points");
  r.at = fit.grid.point(r.index);
  r.fraction_undefined =
      1.0 - static_cast<double>(r.defined_count) / static_cast<double>(fit.grid.count);
  return r;
}

// Streaming variant: never materializes the fit, for proof-matched grids
// with millions of points.
inline UniformErrorResult nw_uniform_error(const Path& x, const std::vector<double>& y,
                                           const RegressionFunction& truth, const Kernel& kernel,
                                           double h, const UniformGrid& grid) {
  if (!(h > 0.0)) throw std::invalid_argument("nw_uniform_error: h must be positive");
  if (y.size() != x.n()) throw std::invalid_argument("nw_uniform_error: response length != path length");
  if (x.values.empty()) throw std::invalid_argument("nw_uniform_error: empty path");
  if (grid.count < 1) throw std::invalid_argument("nw_uniform_error: empty grid");

  const SortedPath sp = SortedPath::from(x.values, {&y});
  const double thresh = DBL_EPSILON * static_cast<double>(x.n());
  UniformErrorResult r;
  detail::dispatch_nw(sp.x, sp.cols, kernel, h, grid,
                      [&](std::int64_t j, double den_raw, const std::array<double, 3>& num_raw) {
                        if (den_raw <= thresh) return;
                        ++r.defined_count;
                        const double e = std::fabs(num_raw[0] / den_raw - truth(grid.point(j)));
                        if (r.index < 0 || e > r.sup_error) {
                          r.sup_error = e;
                          r.index = j;
                        }
                      });
  if (r.defined_count == 0)
    throw fit_failed("nw_uniform_error: every grid point has an empty kernel window");
  r.at = grid.point(r.index);
  r.fraction_undefined =
      1.0 - static_cast<double>(r.defined_count) / static_cast<double>(grid.count);
  return r;
}

// Error decomposition m-hat - m = Theta1 + Theta2 with
// Theta1 = (sum u K) / (sum K) and Theta2 = (sum [m(x_t) - m(y_j)] K) / (sum K).
struct ErrorDecomposition {
  UniformGrid grid;
  std::vector<double> theta1;
  std::vector<double> theta2;
  std::vector<std::uint8_t> defined;
};

inline ErrorDecomposition error_decomposition(const Path& x, const std::vector<double>& y,
                                              const std::vector<double>& u,
                                              const RegressionFunction& truth,
                                              const Kernel& kernel, double h,
                                              const UniformGrid& grid) {
  if (y.size() != x.n() || u.size() != x.n())
    throw std::invalid_argument("error_decomposition: length mismatch");
  if (!kernel.compact())
    throw std::invalid_argument(
        "error_decomposition: the Theta2 bias bound needs a compactly supported kernel");
  if (grid.count > materialize_cap)
    throw std::invalid_argument("error_decomposition: grid too large to materialize");
  // the decomposition presumes y_t = m(x_t) + u_t
  for (std::size_t t = 0; t < y.size(); ++t) {
    const double resid = y[t] - truth(x.values[t]) - u[t];
    if (std::fabs(resid) > 1e-9 * (1.0 + std::fabs(y[t])))
      throw std::invalid_argument("error_decomposition: y != m(x) + u at index " + std::to_string(t));
  }

  std::vector<double> mx(x.n());
  for (std::size_t t = 0; t < x.n(); ++t) mx[t] = truth(x.values[t]);
  const SortedPath sp = SortedPath::from(x.values, {&u, &mx});

  ErrorDecomposition out;
  out.grid = grid;
  out.theta1.assign(static_cast<std::size_t>(grid.count), 0.0);
  out.theta2.assign(static_cast<std::size_t>(grid.count), 0.0);
  out.defined.assign(static_cast<std::size_t>(grid.count), 0);
  const double thresh = DBL_EPSILON * static_cast<double>(x.n());
  detail::dispatch_nw(sp.x, sp.cols, kernel, h, grid,
                      [&](std::int64_t j, double den_raw, const std::array<double, 3>& num_raw) {
                        if (den_raw <= thresh) return;
                        const auto idx = static_cast<std::size_t>(j);
                        out.defined[idx] = 1;
                        out.theta1[idx] = num_raw[0] / den_raw;
                        out.theta2[idx] = num_raw[1] / den_raw - truth(grid.point(j));
                      });
  return out;
}

}  // namespace kernsum
