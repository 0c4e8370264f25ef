#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

#include "kernsum/rng.hpp"
#include "kernsum/stats.hpp"

namespace kernsum {

enum class KernelId { epanechnikov, triangular, quartic, gaussian };

// Kernel catalog entry.  The regularity constants (bound, Lipschitz constants
// of K and K^2, integrals) are stored as exact analytic values, not
// estimates; diagnostics only verify them by sampling.
struct Kernel {
  KernelId id = KernelId::epanechnikov;
  double sup_value = 0.75;
  double lipschitz_const = 1.5;
  double sq_lipschitz_const = 0.86602540378443864676;  // sqrt(3)/2
  double support_radius = 1.0;  // +inf for non-compact kernels
  double integral = 1.0;
  double square_integral = 0.6;

  bool compact() const { return std::isfinite(support_radius); }

  double operator()(double s) const {
    switch (id) {
      case KernelId::epanechnikov: {
        const double q = 1.0 - s * s;
        return q > 0.0 ? 0.75 * q : 0.0;
      }
      case KernelId::triangular: {
        const double q = 1.0 - std::fabs(s);
        return q > 0.0 ? q : 0.0;
      }
      case KernelId::quartic: {
        const double q = 1.0 - s * s;
        return q > 0.0 ? 0.9375 * q * q : 0.0;
      }
      case KernelId::gaussian:
        return 0.39894228040143267794 * std::exp(-0.5 * s * s);
    }
    return 0.0;
  }

  double sq(double s) const {
    const double v = (*this)(s);
    return v * v;
  }

  const char* name() const {
    switch (id) {
      case KernelId::epanechnikov: return "epanechnikov";
      case KernelId::triangular: return "triangular";
      case KernelId::quartic: return "quartic";
      case KernelId::gaussian: return "gaussian";
    }
    return "?";
  }

  static Kernel make(KernelId id) {
    Kernel k;
    k.id = id;
    switch (id) {
      case KernelId::epanechnikov:
        // K(s) = 0.75 (1 - s^2) on [-1, 1]
        k.sup_value = 0.75;
        k.lipschitz_const = 1.5;
        k.sq_lipschitz_const = std::sqrt(3.0) / 2.0;
        k.support_radius = 1.0;
        k.integral = 1.0;
        k.square_integral = 3.0 / 5.0;
        break;
      case KernelId::triangular:
        // K(s) = 1 - |s| on [-1, 1]
        k.sup_value = 1.0;
        k.lipschitz_const = 1.0;
        k.sq_lipschitz_const = 2.0;
        k.support_radius = 1.0;
        k.integral = 1.0;
        k.square_integral = 2.0 / 3.0;
        break;
      case KernelId::quartic:
        // K(s) = (15/16) (1 - s^2)^2 on [-1, 1]
        k.sup_value = 15.0 / 16.0;
        k.lipschitz_const = 5.0 * std::sqrt(3.0) / 6.0;
        k.sq_lipschitz_const = 225.0 / 32.0 * 216.0 / 343.0 / std::sqrt(7.0);
        k.support_radius = 1.0;
        k.integral = 1.0;
        k.square_integral = 5.0 / 7.0;
        break;
      case KernelId::gaussian:
        // K(s) = phi(s); bounded and Lipschitz but not compactly supported
        k.sup_value = 0.39894228040143267794;
        k.lipschitz_const = 0.39894228040143267794 * std::exp(-0.5);
        k.sq_lipschitz_const = std::exp(-0.5) / (std::sqrt(2.0) * 3.14159265358979323846);
        k.support_radius = std::numeric_limits<double>::infinity();
        k.integral = 1.0;
        k.square_integral = 0.5 / std::sqrt(3.14159265358979323846);
        break;
    }
    return k;
  }

  static Kernel parse(const std::string& s) {
    if (s == "epanechnikov") return make(KernelId::epanechnikov);
    if (s == "triangular") return make(KernelId::triangular);
    if (s == "quartic") return make(KernelId::quartic);
    if (s == "gaussian") return make(KernelId::gaussian);
    throw std::invalid_argument("unknown kernel: " + s);
  }
};

// Diagnostic report for the regularity conditions the rate results assume of
// the kernel: boundedness, a global Lipschitz constant, integrability.
// compact_support is informational: the stationary-process identifications
// and the bias bound require it, the pure sum bounds do not.
struct RegularityReport {
  bool bounded = false;
  bool lipschitz_verified = false;
  bool integrable = false;
  bool square_integrable = false;
  bool compact_support = false;
  double worst_lipschitz_ratio = 0.0;
  double quadrature_integral = 0.0;
  double quadrature_square_integral = 0.0;

  bool pass() const { return bounded && lipschitz_verified && integrable && square_integrable; }
};

inline RegularityReport check_regularity(const Kernel& k, std::uint64_t seed = 0x5eedu,
                                         int n_pairs = 100000) {
  RegularityReport r;
  r.compact_support = k.compact();
  const double range = k.compact() ? k.support_radius + 0.5 : 8.0;

  Rng rng(seed);
  bool bounded = true;
  double worst = 0.0;
  for (int i = 0; i < n_pairs; ++i) {
    const double x = (2.0 * rng.uniform01() - 1.0) * range;
    const double y = (2.0 * rng.uniform01() - 1.0) * range;
    const double fx = k(x), fy = k(y);
    if (fx > k.sup_value * (1 + 1e-12) || fy > k.sup_value * (1 + 1e-12)) bounded = false;
    if (x != y) worst = std::max(worst, std::fabs(fx - fy) / std::fabs(x - y));
  }
  r.bounded = bounded && k(0.0) <= k.sup_value * (1 + 1e-12);
  r.worst_lipschitz_ratio = worst;
  r.lipschitz_verified = worst <= k.lipschitz_const * (1 + 1e-9);

  const double lim = k.compact() ? k.support_radius : 10.0;
  r.quadrature_integral = adaptive_simpson([&](double s) { return k(s); }, -lim, lim, 1e-10);
  r.quadrature_square_integral =
      adaptive_simpson([&](double s) { return k.sq(s); }, -lim, lim, 1e-10);
  r.integrable = std::fabs(r.quadrature_integral - k.integral) < 1e-6;
  r.square_integrable = std::fabs(r.quadrature_square_integral - k.square_integral) < 1e-6;
  return r;
}

}  // namespace kernsum
