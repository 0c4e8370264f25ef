#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kernsum/path.hpp"
#include "kernsum/rng.hpp"

namespace kernsum {

inline constexpr int default_burn_in = 1000;

namespace detail {

// Moments of the random Lipschitz coefficient L_eps of the iteration maps,
// estimated once per innovation law from 10^6 draws with a fixed internal
// seed and cached.  TAR (threshold at 0, continuous) has L = max(|a1|,|a2|)
// independent of eps; ARCH has L_eps = |a2 eps|.
struct EpsMoments {
  double mean_log_abs = 0.0;
  double mean_sq = 0.0;
};

inline const EpsMoments& eps_moments(InnovationKind kind) {
  static EpsMoments cache[3];
  static bool ready[3] = {false, false, false};
  const int idx = static_cast<int>(kind);
  if (!ready[idx]) {
    Rng rng(0xC0FFEEULL + static_cast<std::uint64_t>(idx));
    InnovationDist d{kind};
    double slog = 0.0, ssq = 0.0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) {
      const double e = d.draw(rng);
      slog += std::log(std::fabs(e) + 1e-300);
      ssq += e * e;
    }
    cache[idx] = {slog / n, ssq / n};
    ready[idx] = true;
  }
  return cache[idx];
}

}  // namespace detail

// --- random walk ------------------------------------------------------------

inline Path gen_random_walk(std::int64_t n, InnovationDist dist, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("gen_random_walk: n must be >= 1");
  Rng rng(seed);
  Path p;
  p.kind = ProcessKind::random_walk;
  p.seed = seed;
  p.params = {{"dist", static_cast<double>(dist.kind)}};
  p.values.resize(static_cast<std::size_t>(n));
  double s = 0.0;
  for (auto& v : p.values) {
    s += dist.draw(rng);
    v = s;
  }
  return p;
}

// Test hook: walk with caller-supplied increments (e.g. all zero).
inline Path random_walk_from_increments(const std::vector<double>& eps) {
  if (eps.empty()) throw std::invalid_argument("random_walk_from_increments: empty increments");
  Path p;
  p.kind = ProcessKind::random_walk;
  p.values.resize(eps.size());
  double s = 0.0;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    s += eps[i];
    p.values[i] = s;
  }
  return p;
}

// --- linear process ----------------------------------------------------------

// MA coefficient family: either geometric phi_k = rho^k or an explicit
// finite list.  Geometric families are truncated at the smallest K whose
// discarded tail mass is below tail_tol.
struct CoefFamily {
  bool geometric = true;
  double rho = 0.5;
  std::vector<double> coeffs;

  static CoefFamily geo(double rho) {
    CoefFamily f;
    f.geometric = true;
    f.rho = rho;
    return f;
  }
  static CoefFamily list(std::vector<double> c) {
    CoefFamily f;
    f.geometric = false;
    f.coeffs = std::move(c);
    return f;
  }

  // Truncated coefficients with tail sum_{k>K} |phi_k| < tail_tol.
  std::vector<double> truncated(double tail_tol) const {
    if (geometric) {
      if (std::fabs(rho) >= 1.0)
        throw std::invalid_argument("linear process: divergent coefficient family (|rho| >= 1)");
      if (!(tail_tol > 0.0)) throw std::invalid_argument("linear process: tail_tol must be positive");
      std::vector<double> out;
      out.push_back(1.0);
      double pw = rho;
      // tail after K terms: |rho|^{K+1} / (1 - |rho|)
      while (std::pow(std::fabs(rho), static_cast<double>(out.size())) /
                 (1.0 - std::fabs(rho)) >=
             tail_tol) {
        out.push_back(pw);
        pw *= rho;
        if (out.size() > 1000000) throw std::invalid_argument("linear process: tail_tol too small");
      }
      return out;
    }
    if (coeffs.empty()) throw std::invalid_argument("linear process: empty coefficient list");
    return coeffs;
  }
};

inline Path gen_linear_process(std::int64_t n, const CoefFamily& family, InnovationDist dist,
                               double tail_tol, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("gen_linear_process: n must be >= 1");
  const std::vector<double> phi = family.truncated(tail_tol);
  double total = 0.0;
  for (double c : phi) total += c;
  if (std::fabs(total) < 1e-12)
    throw std::invalid_argument("gen_linear_process: coefficients sum to zero (phi != 0 required)");

  const std::size_t K = phi.size() - 1;  // burn-in of K pre-samples
  Rng rng(seed);
  std::vector<double> eps(static_cast<std::size_t>(n) + K);
  for (auto& e : eps) e = dist.draw(rng);

  Path p;
  p.kind = ProcessKind::linear_process;
  p.seed = seed;
  p.params = {{"K", static_cast<double>(K)}, {"dist", static_cast<double>(dist.kind)}};
  p.values.resize(static_cast<std::size_t>(n));
  for (std::size_t t = 0; t < p.values.size(); ++t) {
    double s = 0.0;
    for (std::size_t k = 0; k <= K; ++k) s += phi[k] * eps[t + K - k];
    p.values[t] = s;
  }
  return p;
}

// --- threshold AR ------------------------------------------------------------

// x_k = a1 x_{k-1} 1{x_{k-1} < 0} + a2 x_{k-1} 1{x_{k-1} >= 0} + eps_k.
// Threshold fixed at 0, so the iteration map is continuous and its Lipschitz
// coefficient is max(|a1|, |a2|); stability needs that < 1.
inline Path gen_tar(std::int64_t n, double a1, double a2, InnovationDist dist, std::uint64_t seed,
                    int burn_in = default_burn_in) {
  if (n < 1) throw std::invalid_argument("gen_tar: n must be >= 1");
  const double L = std::max(std::fabs(a1), std::fabs(a2));
  if (!(L < 1.0))
    throw std::invalid_argument(
        "gen_tar: contraction violated, E log L_eps = log max(|a1|,|a2|) >= 0");
  if (!(L * L < 1.0))
    throw std::invalid_argument("gen_tar: contraction violated, E L_eps^2 = max(|a1|,|a2|)^2 >= 1");

  Rng rng(seed);
  Path p;
  p.kind = ProcessKind::tar;
  p.seed = seed;
  p.params = {{"a1", a1}, {"a2", a2}, {"dist", static_cast<double>(dist.kind)}};
  p.values.resize(static_cast<std::size_t>(n));
  double x = 0.0;
  for (int b = 0; b < burn_in; ++b) x = (x < 0 ? a1 : a2) * x + dist.draw(rng);
  for (auto& v : p.values) {
    x = (x < 0 ? a1 : a2) * x + dist.draw(rng);
    v = x;
  }
  return p;
}

// --- ARCH --------------------------------------------------------------------

// x_k = eps_k sqrt(a1^2 + a2^2 x_{k-1}^2).  Stability needs a1 > 0 and
// E (a2 eps)^2 < 1, checked against the sampled second moment.
inline Path gen_arch(std::int64_t n, double a1, double a2, InnovationDist dist, std::uint64_t seed,
                     int burn_in = default_burn_in) {
  if (n < 1) throw std::invalid_argument("gen_arch: n must be >= 1");
  if (!(a1 > 0.0)) throw std::invalid_argument("gen_arch: a1 must be positive");
  const double esq = detail::eps_moments(dist.kind).mean_sq;
  if (!(a2 * a2 * esq < 1.0))
    throw std::invalid_argument("gen_arch: variance condition violated, E L_eps^2 = a2^2 E eps^2 >= 1");

  Rng rng(seed);
  Path p;
  p.kind = ProcessKind::arch;
  p.seed = seed;
  p.params = {{"a1", a1}, {"a2", a2}, {"dist", static_cast<double>(dist.kind)}};
  p.values.resize(static_cast<std::size_t>(n));
  double x = 0.0;
  for (int b = 0; b < burn_in; ++b) x = dist.draw(rng) * std::sqrt(a1 * a1 + a2 * a2 * x * x);
  for (auto& v : p.values) {
    x = dist.draw(rng) * std::sqrt(a1 * a1 + a2 * a2 * x * x);
    v = x;
  }
  return p;
}

// --- stationary mixing AR(1) -------------------------------------------------

inline Path gen_mixing_ar(std::int64_t n, double rho, InnovationDist dist, std::uint64_t seed,
                          int burn_in = default_burn_in) {
  if (n < 1) throw std::invalid_argument("gen_mixing_ar: n must be >= 1");
  if (!(std::fabs(rho) < 1.0)) throw std::invalid_argument("gen_mixing_ar: |rho| must be < 1");

  Rng rng(seed);
  Path p;
  p.kind = ProcessKind::mixing_ar;
  p.seed = seed;
  p.params = {{"rho", rho}, {"dist", static_cast<double>(dist.kind)}};
  p.values.resize(static_cast<std::size_t>(n));

  double x;
  if (dist.kind == InnovationKind::gaussian) {
    // exact stationary start
    x = rng.normal() / std::sqrt(1.0 - rho * rho);
  } else {
    x = 0.0;
    for (int b = 0; b < burn_in; ++b) x = rho * x + dist.draw(rng);
  }
  for (auto& v : p.values) {
    x = rho * x + dist.draw(rng);
    v = x;
  }
  return p;
}

// --- error sequences ----------------------------------------------------------

// Martingale-difference errors u_t = sigma(x_t) eta_t with eta_t fresh i.i.d.
// mean-0 variance-1 noise.  sigma empty means the exogenous case sigma == 1.
struct ErrorSpec {
  int p = 2;  // moment order: E|u|^{2p} finite is the working assumption
  InnovationDist dist;
  std::function<double(double)> sigma;  // empty => exogenous
  std::string sigma_name = "1";

  static ErrorSpec exogenous(InnovationDist d, int p = 2) {
    ErrorSpec s;
    s.p = p;
    s.dist = d;
    return s;
  }
  static ErrorSpec endogenous_sin(InnovationDist d, int p = 2) {
    ErrorSpec s;
    s.p = p;
    s.dist = d;
    s.sigma = [](double x) { return 1.0 + 0.5 * std::sin(x); };
    s.sigma_name = "1+0.5*sin(x)";
    return s;
  }
};

inline std::vector<double> gen_errors(const Path& path, const ErrorSpec& spec,
                                      std::uint64_t seed) {
  if (spec.p < 1) throw std::invalid_argument("gen_errors: moment order p must be >= 1");
  if (spec.sigma) {
    // volatility map must be bounded away from 0 and infinity on the path
    for (double x : path.values) {
      const double s = spec.sigma(x);
      if (!std::isfinite(s) || s <= 0.0 || s > 1e6)
        throw std::invalid_argument("gen_errors: volatility map not bounded on the sampled path");
    }
  }
  Rng rng(seed);
  std::vector<double> u(path.n());
  for (std::size_t t = 0; t < u.size(); ++t) {
    const double eta = spec.dist.draw(rng);
    u[t] = spec.sigma ? spec.sigma(path.values[t]) * eta : eta;
  }
  return u;
}

// Numeric contraction diagnostics for the iteration maps (reported by the
// CLI `check` subcommand; generator constructors enforce the same bounds).
struct ContractionReport {
  double e_log_l = 0.0;
  double e_l_sq = 0.0;
  bool pass = false;
  std::string detail;
};

inline ContractionReport check_tar_contraction(double a1, double a2, InnovationDist) {
  ContractionReport r;
  const double L = std::max(std::fabs(a1), std::fabs(a2));
  r.e_log_l = std::log(L);
  r.e_l_sq = L * L;
  r.pass = r.e_log_l < 0.0 && r.e_l_sq < 1.0;
  r.detail = "L = max(|a1|,|a2|)";
  return r;
}

inline ContractionReport check_arch_contraction(double a1, double a2, InnovationDist dist) {
  ContractionReport r;
  const auto& m = detail::eps_moments(dist.kind);
  r.e_log_l = std::log(std::fabs(a2) + 1e-300) + m.mean_log_abs;
  r.e_l_sq = a2 * a2 * m.mean_sq;
  r.pass = a1 > 0.0 && r.e_l_sq < 1.0;
  r.detail = "L_eps = |a2 eps|, moments from 10^6 draws";
  return r;
}

}  // namespace kernsum
