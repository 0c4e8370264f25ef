#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace kernsum {

// One splitmix64 step: advances `state` and returns the mixed output.
// Used only for deriving independent seeds, never as the sampling engine.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Collision-resistant seed for stream (a, b) of a base seed.  Experiments
// verify distinctness across all (n, replicate) pairs at run time.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = base;
  s = splitmix64(s) ^ (a + 0x9e3779b97f4a7c15ULL);
  s = splitmix64(s) ^ (b + 0xc2b2ae3d27d4eb4fULL);
  return splitmix64(s);
}

// Thin deterministic wrapper over mt19937_64.  All real-valued draws go
// through explicit inverse-CDF / Box-Muller transforms so that sequences are
// bit-identical across standard libraries (std::normal_distribution is not
// pinned by the standard).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t raw() { return eng_(); }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // Uniform on the open interval (0, 1); safe as a log/logit argument.
  double uniform01_open() {
    return (static_cast<double>(eng_() >> 12) + 0.5) * 0x1.0p-52;
  }

  // Standard normal via Box-Muller, caching the second variate.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01_open();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double th = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(th);
    have_spare_ = true;
    return r * std::cos(th);
  }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

enum class InnovationKind { gaussian, laplace, logistic };

// Innovation distributions, all standardized to mean 0 and variance 1.
// The menu is restricted to laws with absolutely integrable characteristic
// functions (gaussian: exp(-t^2/2); laplace: 1/(1+t^2/2); logistic:
// pi*s*t/sinh(pi*s*t)), which the random-walk rate results require.
struct InnovationDist {
  InnovationKind kind = InnovationKind::gaussian;

  double draw(Rng& rng) const {
    switch (kind) {
      case InnovationKind::gaussian:
        return rng.normal();
      case InnovationKind::laplace: {
        // scale b = 1/sqrt(2) gives variance 2b^2 = 1
        const double u = rng.uniform01_open() - 0.5;
        const double b = 0.70710678118654752440;
        return (u < 0 ? b : -b) * std::log1p(-2.0 * std::fabs(u));
      }
      case InnovationKind::logistic: {
        // scale s = sqrt(3)/pi gives variance s^2 pi^2 / 3 = 1
        const double u = rng.uniform01_open();
        const double s = 0.55132889542179204776;
        return s * std::log(u / (1.0 - u));
      }
    }
    return 0.0;
  }

  const char* name() const {
    switch (kind) {
      case InnovationKind::gaussian: return "gaussian";
      case InnovationKind::laplace: return "laplace";
      case InnovationKind::logistic: return "logistic";
    }
    return "?";
  }

  static InnovationDist parse(const std::string& s) {
    if (s == "gaussian") return {InnovationKind::gaussian};
    if (s == "laplace") return {InnovationKind::laplace};
    if (s == "logistic") return {InnovationKind::logistic};
    throw std::invalid_argument("unknown innovation distribution: " + s);
  }
};

}  // namespace kernsum
