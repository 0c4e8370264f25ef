#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kernsum/path.hpp"
#include "kernsum/rng.hpp"
#include "kernsum/stats.hpp"

namespace kernsum {

// Regeneration bookkeeping for a split chain: indicator sequence Y_1..Y_n,
// regeneration times rho_k = min{ i > rho_{k-1} : Y_i = 1 }, and the count
// N(m) = #{ k : rho_k <= m }.
struct RegenRecord {
  std::vector<std::int64_t> rho;   // ascending, 1-based times into the path
  std::vector<std::uint8_t> Y;     // Y[t-1] is the indicator at time t

  std::int64_t count() const { return static_cast<std::int64_t>(rho.size()); }

  std::int64_t n_of(std::int64_t m) const {
    std::int64_t lo = 0, hi = count();
    while (lo < hi) {
      const std::int64_t mid = (lo + hi) / 2;
      if (rho[static_cast<std::size_t>(mid)] <= m) lo = mid + 1;
      else hi = mid;
    }
    return lo;
  }

  void validate(std::size_t path_len) const {
    if (Y.size() != path_len)
      throw std::invalid_argument("RegenRecord: indicator length does not match path");
    std::int64_t prev = 0;
    for (std::int64_t t : rho) {
      if (t <= prev || t > static_cast<std::int64_t>(path_len))
        throw std::invalid_argument("RegenRecord: regeneration times not strictly increasing in range");
      if (!Y[static_cast<std::size_t>(t - 1)])
        throw std::invalid_argument("RegenRecord: Y[rho_k] must be 1");
      prev = t;
    }
    std::size_t ones = 0;
    for (auto y : Y) ones += (y != 0);
    if (ones != rho.size())
      throw std::invalid_argument("RegenRecord: rho must list every time with Y=1");
  }

  static RegenRecord from_indicators(std::vector<std::uint8_t> y) {
    RegenRecord r;
    r.Y = std::move(y);
    for (std::size_t t = 0; t < r.Y.size(); ++t)
      if (r.Y[t]) r.rho.push_back(static_cast<std::int64_t>(t) + 1);
    return r;
  }
};

// A Markov transition kernel with an explicit minorization
// P(x, .) >= b 1_C(x) nu(.).  All samplers draw through the supplied Rng so
// trajectories are reproducible.
struct MinorizedChain {
  std::function<double(double, Rng&)> transition;        // y ~ P(x, .)
  std::function<double(double, double)> trans_density;   // p(x, y)
  std::function<double(Rng&)> sample_nu;
  std::function<double(double)> nu_density;
  std::function<bool(double)> in_C;
  double b = 1.0;
  std::string name = "chain";
};

// Gaussian AR(1) x' = rho x + eps with small set C = [-1, 1].
// Over x in C the transition density p(x, y) = phi(y - rho x) is minorized by
// g(y) = phi(|y| + rho), so b = integral g = 2 (1 - Phi(rho)) and nu = g / b.
inline MinorizedChain make_ar1_split_chain(double rho = 0.5) {
  if (!(rho > 0.0 && rho < 1.0))
    throw std::invalid_argument("make_ar1_split_chain: rho must be in (0,1)");
  MinorizedChain c;
  c.name = "ar1-split";
  c.b = 2.0 * (1.0 - normal_cdf(rho));
  c.transition = [rho](double x, Rng& rng) { return rho * x + rng.normal(); };
  c.trans_density = [rho](double x, double y) { return normal_pdf(y - rho * x); };
  c.nu_density = [rho, b = c.b](double y) { return normal_pdf(std::fabs(y) + rho) / b; };
  c.sample_nu = [rho](Rng& rng) {
    // |y| + rho ~ standard normal conditioned on exceeding rho; sign symmetric
    double z;
    do {
      z = rng.normal();
    } while (z <= rho);
    const double mag = z - rho;
    return rng.uniform01() < 0.5 ? mag : -mag;
  };
  c.in_C = [](double x) { return std::fabs(x) <= 1.0; };
  return c;
}

// Degenerate instance whose kernel equals nu itself (b = 1, C the whole
// line): every step regenerates.
inline MinorizedChain make_full_regeneration_chain() {
  MinorizedChain c;
  c.name = "iid-normal";
  c.b = 1.0;
  c.transition = [](double, Rng& rng) { return rng.normal(); };
  c.trans_density = [](double, double y) { return normal_pdf(y); };
  c.sample_nu = [](Rng& rng) { return rng.normal(); };
  c.nu_density = [](double y) { return normal_pdf(y); };
  c.in_C = [](double) { return true; };
  return c;
}

// Simulate the split chain: x_0 ~ nu; at each state the regeneration flag is
// Bernoulli(b 1_C(x)); after a flagged state the next value is drawn from nu,
// otherwise from the residual kernel (P - b 1_C nu) / (1 - b) via rejection.
// The marginal law of x is exactly that of the original chain.
inline std::pair<Path, RegenRecord> gen_split_chain(std::int64_t n, const MinorizedChain& chain,
                                                    std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("gen_split_chain: n must be >= 1");
  if (!(chain.b > 0.0 && chain.b <= 1.0))
    throw std::invalid_argument("gen_split_chain: b must lie in (0, 1]");

  Rng rng(seed);
  Path p;
  p.kind = ProcessKind::split_chain;
  p.seed = seed;
  p.params = {{"b", chain.b}};
  p.values.resize(static_cast<std::size_t>(n));
  std::vector<std::uint8_t> y(static_cast<std::size_t>(n));

  auto step = [&](double x, bool regen) -> double {
    if (regen) return chain.sample_nu(rng);
    if (!chain.in_C(x)) return chain.transition(x, rng);
    // residual kernel: propose from P(x,.), accept w.p. 1 - b nu(y)/p(x,y)
    for (int tries = 0; tries < 1000000; ++tries) {
      const double cand = chain.transition(x, rng);
      const double num = chain.b * chain.nu_density(cand);
      const double den = chain.trans_density(x, cand);
      if (!(den > 0.0) || num > den * (1.0 + 1e-9))
        throw std::runtime_error("gen_split_chain: minorization violated by the supplied chain");
      if (rng.uniform01() >= num / den) return cand;
    }
    throw std::runtime_error("gen_split_chain: residual kernel sampler failed to accept");
  };

  double x = chain.sample_nu(rng);
  bool regen = rng.uniform01() < (chain.in_C(x) ? chain.b : 0.0);
  for (std::int64_t t = 0; t < n; ++t) {
    x = step(x, regen);
    regen = rng.uniform01() < (chain.in_C(x) ? chain.b : 0.0);
    p.values[static_cast<std::size_t>(t)] = x;
    y[static_cast<std::size_t>(t)] = regen ? 1 : 0;
  }
  return {std::move(p), RegenRecord::from_indicators(std::move(y))};
}

}  // namespace kernsum
