#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace kernsum {

// h(n) = c * n^{-gamma} * (log n)^{log_exponent}.  The rate theory needs
// h -> 0 and n h -> infinity; validity is checked numerically on the
// experiment's own n-grid rather than asserted symbolically.
struct BandwidthRule {
  double c = 1.0;
  double gamma = 0.2;
  double log_exponent = 0.0;

  double h(double n) const {
    return c * std::pow(n, -gamma) * std::pow(std::log(n), log_exponent);
  }

  bool valid_over(const std::vector<std::int64_t>& n_grid) const {
    if (c <= 0.0 || gamma <= 0.0 || gamma >= 1.0) return false;
    for (std::size_t i = 1; i < n_grid.size(); ++i) {
      const double n0 = static_cast<double>(n_grid[i - 1]);
      const double n1 = static_cast<double>(n_grid[i]);
      if (h(n1) >= h(n0)) return false;                // h must shrink
      if (n1 * h(n1) <= n0 * h(n0)) return false;      // nh must grow
    }
    return true;
  }
};

// Normalizer c_n = a(n) * h with a(n) the regular-growth rate of the
// occupation counts: a(n) = n for stationary chains, sqrt(n) for the random
// walk, n^beta in general.  The slowly varying factor is fixed to 1; it is
// not identifiable at simulation scale.
struct NormalizationProfile {
  enum class Kind { stationary, random_walk, generic };
  Kind kind = Kind::stationary;
  double beta = 1.0;

  double a(double n) const {
    switch (kind) {
      case Kind::stationary: return n;
      case Kind::random_walk: return std::sqrt(n);
      case Kind::generic: return std::pow(n, beta);
    }
    return n;
  }

  double c_n(double n, double h) const { return a(n) * h; }

  double beta_exponent() const {
    switch (kind) {
      case Kind::stationary: return 1.0;
      case Kind::random_walk: return 0.5;
      case Kind::generic: return beta;
    }
    return 1.0;
  }

  const char* name() const {
    switch (kind) {
      case Kind::stationary: return "stationary";
      case Kind::random_walk: return "random-walk";
      case Kind::generic: return "generic";
    }
    return "?";
  }

  static NormalizationProfile parse(const std::string& s, double beta = 1.0) {
    if (s == "stationary") return {Kind::stationary, 1.0};
    if (s == "random-walk") return {Kind::random_walk, 0.5};
    if (s == "generic") {
      if (beta <= 0.0 || beta > 1.0)
        throw std::invalid_argument("generic profile needs beta in (0,1]");
      return {Kind::generic, beta};
    }
    throw std::invalid_argument("unknown normalization profile: " + s);
  }
};

// Uniform symmetric grid over [lo, lo + (count-1)*step].  Realized lazily:
// points are computed on demand so grids with billions of nodes are fine.
struct UniformGrid {
  double lo = 0.0;
  double step = 0.0;
  std::int64_t count = 0;

  double point(std::int64_t i) const { return lo + static_cast<double>(i) * step; }
  double hi() const { return point(count - 1); }

  // Covers [-b, b] with spacing <= max_spacing and exact endpoints.
  static UniformGrid over(double b, double max_spacing) {
    if (!(b > 0.0)) throw std::invalid_argument("grid bound must be positive");
    if (!(max_spacing > 0.0)) throw std::invalid_argument("grid spacing must be positive");
    UniformGrid g;
    const double raw = 2.0 * b / max_spacing;
    if (raw > 9.0e18) throw std::invalid_argument("grid spacing too small for bound");
    g.count = static_cast<std::int64_t>(std::ceil(raw)) + 1;
    if (g.count < 2) g.count = 2;
    g.lo = -b;
    g.step = 2.0 * b / static_cast<double>(g.count - 1);
    return g;
  }
};

// Spatial range and resolution for sup/inf statistics over |x| <= b_n.
// The default spacing follows the covering argument used in the proofs:
// delta = h * sqrt(c_n log n) / n, capped above by h/10, so discretization
// error stays below the target rate for Lipschitz kernels.
struct GridSpec {
  enum class BoundRule { fixed, scaled_sqrt, power };
  BoundRule bound_rule = BoundRule::fixed;
  double bound_value = 1.0;  // fixed: b = value; scaled_sqrt: b = value * sqrt(n) * n^{-kappa}
  double kappa = 0.0;
  double power_m = 1.0;      // power: b = n^m

  bool proof_matched_spacing = true;
  double explicit_spacing = 0.0;

  double bound(double n) const {
    switch (bound_rule) {
      case BoundRule::fixed: return bound_value;
      case BoundRule::scaled_sqrt: return bound_value * std::sqrt(n) * std::pow(n, -kappa);
      case BoundRule::power: return std::pow(n, power_m);
    }
    return bound_value;
  }

  double spacing(double n, double h, double c_n) const {
    if (!proof_matched_spacing) {
      if (!(explicit_spacing > 0.0)) throw std::invalid_argument("explicit spacing must be positive");
      return explicit_spacing;
    }
    const double proof = h * std::sqrt(c_n * std::log(n)) / n;
    return std::min(proof, h / 10.0);
  }

  UniformGrid realize(double n, double h, double c_n) const {
    return UniformGrid::over(bound(n), spacing(n, h, c_n));
  }

  static GridSpec fixed(double b) {
    GridSpec g;
    g.bound_rule = BoundRule::fixed;
    g.bound_value = b;
    return g;
  }
  static GridSpec scaled_sqrt(double tau, double kappa = 0.0) {
    GridSpec g;
    g.bound_rule = BoundRule::scaled_sqrt;
    g.bound_value = tau;
    g.kappa = kappa;
    return g;
  }
  static GridSpec power(double m) {
    GridSpec g;
    g.bound_rule = BoundRule::power;
    g.power_m = m;
    return g;
  }
};

}  // namespace kernsum
