#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "kernsum/processes.hpp"
#include "kernsum/regression.hpp"
#include "kernsum/rng.hpp"
#include "kernsum/stats.hpp"

using namespace kernsum;

namespace {

struct NaiveNW {
  std::vector<double> den_raw;
  std::vector<double> est;
};

NaiveNW naive_nw(const Path& x, const std::vector<double>& y, const Kernel& k, double h,
                 const UniformGrid& g) {
  NaiveNW r;
  for (std::int64_t j = 0; j < g.count; ++j) {
    const double yj = g.point(j);
    KahanSum num, den;
    for (std::size_t t = 0; t < x.n(); ++t) {
      const double w = k((x.values[t] - yj) / h);
      den.add(w);
      num.add(y[t] * w);
    }
    r.den_raw.push_back(den.value());
    r.est.push_back(den.value() > 0.0 ? num.value() / den.value() : 0.0);
  }
  return r;
}

}  // namespace

TEST_CASE("regression catalog evaluates its closed forms", "[regression]") {
  const auto lin = RegressionFunction::polynomial({1.0, 0.5, -0.25});
  CHECK(lin(2.0) == Catch::Approx(1.0 + 0.5 * 2.0 - 0.25 * 4.0).margin(1e-15));
  CHECK(lin(0.0) == 1.0);

  const auto pw = RegressionFunction::power(1.0, 1.0, 0.5);
  CHECK(pw(4.0) == Catch::Approx(3.0).margin(1e-12));
  CHECK(pw(-4.0) == pw(4.0));

  const auto rat = RegressionFunction::rational(3.0);
  CHECK(rat(1.0) == Catch::Approx(1.5).margin(1e-15));
  CHECK(rat(0.0) == 0.0);
  CHECK(rat(-1.0) == -rat(1.0));

  const auto lg = RegressionFunction::logistic(1.0, 3.0);
  CHECK(lg(0.0) == Catch::Approx(2.0).margin(1e-15));
  // extreme arguments stay finite and hit the asymptotes
  CHECK(lg(800.0) == Catch::Approx(3.0).margin(1e-12));
  CHECK(lg(-800.0) == Catch::Approx(1.0).margin(1e-12));
  CHECK(lg(2.0) > lg(1.0));

  CHECK_THROWS_AS(RegressionFunction::polynomial({}), std::invalid_argument);
  CHECK_THROWS_AS(RegressionFunction::power(0, 1, 0.0), std::invalid_argument);
}

TEST_CASE("stored smoothness data dominates sampled increments", "[regression]") {
  const std::vector<RegressionFunction> fns = {
      RegressionFunction::polynomial({1.0, 0.5, -0.25, 0.125}),
      RegressionFunction::power(0.0, 1.0, 0.5),
      RegressionFunction::power(2.0, 1.5, 1.7),
      RegressionFunction::rational(3.0),
      RegressionFunction::logistic(1.0, 3.0),
  };
  std::uint64_t seed = 700;
  for (const auto& m : fns) {
    CAPTURE(m.name());
    CHECK(holder_worst_ratio(m, 10.0, 20000, ++seed) <= 1.0 + 1e-9);
  }
  // the logistic bound is tight near the origin, so the ratio is not vacuous
  CHECK(holder_worst_ratio(RegressionFunction::logistic(1.0, 3.0), 2.0, 20000, 7) > 0.5);
}

TEST_CASE("envelope sup sits at the grid endpoint", "[regression]") {
  const auto pw = RegressionFunction::power(0.0, 1.0, 1.7);
  const UniformGrid g = UniformGrid::over(5.0, 0.5);
  CHECK(pw.envelope_sup(g) == pw.envelope(5.0));
  CHECK(pw.envelope(5.0) == Catch::Approx(std::pow(6.0, 0.7)).margin(1e-12));

  const auto quad = RegressionFunction::polynomial({0.0, 0.0, 1.0});  // x^2
  CHECK(quad.envelope(5.0) == Catch::Approx(12.0).margin(1e-12));
  CHECK(RegressionFunction::logistic(1.0, 3.0).envelope_sup(g) == 1.0);
}

TEST_CASE("constant responses are reproduced", "[regression]") {
  const Path p = gen_random_walk(512, {}, 71);
  const Kernel k = Kernel::make(KernelId::epanechnikov);
  const UniformGrid g = UniformGrid::over(10.0, 0.5);

  std::vector<double> y8(p.n(), 8.0);
  const NWFit f8 = nw_fit(p, y8, k, 0.4, g);
  REQUIRE(f8.defined_count > 0);
  for (std::size_t j = 0; j < f8.estimate.size(); ++j)
    if (f8.defined[j]) CHECK(f8.estimate[j] == 8.0);  // exact: 8*K rounds to itself

  std::vector<double> y7(p.n(), 7.0);
  const NWFit f7 = nw_fit(p, y7, k, 0.4, g);
  for (std::size_t j = 0; j < f7.estimate.size(); ++j)
    if (f7.defined[j]) CHECK(f7.estimate[j] == Catch::Approx(7.0).epsilon(1e-13));

  const UniformErrorResult err = uniform_error(f8, RegressionFunction::polynomial({8.0}));
  CHECK(err.sup_error == 0.0);
  CHECK(err.defined_count == f8.defined_count);
}

TEST_CASE("fit agrees with the direct double loop", "[regression]") {
  const Path p = gen_mixing_ar(768, 0.7, {}, 72);
  Rng rng(73);
  const auto truth = RegressionFunction::logistic(1.0, 3.0);
  std::vector<double> y(p.n());
  for (std::size_t t = 0; t < p.n(); ++t) y[t] = truth(p.values[t]) + 0.3 * rng.normal();

  for (KernelId id : {KernelId::triangular, KernelId::gaussian}) {
    const Kernel k = Kernel::make(id);
    const UniformGrid g = UniformGrid::over(3.0, 0.07);
    const NWFit fit = nw_fit(p, y, k, 0.35, g);
    const NaiveNW naive = naive_nw(p, y, k, 0.35, g);
    double worst = 0.0;
    for (std::size_t j = 0; j < fit.estimate.size(); ++j) {
      CHECK(fit.denominator[j] * 0.35 ==
            Catch::Approx(naive.den_raw[j]).margin(1e-13 * p.n()).epsilon(1e-12));
      if (!fit.defined[j]) continue;
      REQUIRE(naive.den_raw[j] > 0.0);
      worst = std::max(worst, std::fabs(fit.estimate[j] - naive.est[j]) /
                                  std::max(1.0, std::fabs(naive.est[j])));
    }
    CAPTURE(k.name());
    CHECK(worst < 1e-10);
    if (!k.compact()) CHECK(fit.defined_count == g.count);  // every window sees all points
  }
}

TEST_CASE("noiseless smooth responses stay within the window bias bound", "[regression]") {
  const Path p = gen_random_walk(1024, {}, 74);
  const Kernel k = Kernel::make(KernelId::epanechnikov);
  const double h = 0.3;
  const UniformGrid g = UniformGrid::over(12.0, 0.4);

  const auto line = RegressionFunction::polynomial({0.0, 2.0});
  std::vector<double> y(p.n());
  for (std::size_t t = 0; t < p.n(); ++t) y[t] = line(p.values[t]);
  const NWFit fit = nw_fit(p, y, k, h, g);
  const UniformErrorResult err = uniform_error(fit, line);
  CHECK(err.sup_error > 0.0);
  CHECK(err.sup_error <= 2.0 * k.support_radius * h * (1.0 + 1e-12));
}

TEST_CASE("adding a constant shifts the fit by that constant", "[regression]") {
  const Path p = gen_random_walk(400, {}, 75);
  Rng rng(76);
  std::vector<double> y(p.n()), ys(p.n());
  for (std::size_t t = 0; t < p.n(); ++t) {
    y[t] = std::sin(p.values[t]) + 0.2 * rng.normal();
    ys[t] = y[t] + 5.0;
  }
  const Kernel k = Kernel::make(KernelId::quartic);
  const UniformGrid g = UniformGrid::over(8.0, 0.3);
  const NWFit f0 = nw_fit(p, y, k, 0.5, g);
  const NWFit f1 = nw_fit(p, ys, k, 0.5, g);
  REQUIRE(f0.defined == f1.defined);  // denominators are untouched by the shift
  for (std::size_t j = 0; j < f0.estimate.size(); ++j)
    if (f0.defined[j])
      CHECK(f1.estimate[j] - f0.estimate[j] == Catch::Approx(5.0).margin(1e-12));
}

TEST_CASE("the fit at a point only sees its own window", "[regression]") {
  const Path p = gen_random_walk(600, {}, 77);
  Rng rng(78);
  std::vector<double> y(p.n());
  for (std::size_t t = 0; t < p.n(); ++t) y[t] = p.values[t] + rng.normal();
  const Kernel k = Kernel::make(KernelId::epanechnikov);
  const double h = 0.6, y0 = 1.25;
  const UniformGrid at{y0, 1.0, 1};

  Path sub;
  std::vector<double> ysub;
  for (std::size_t t = 0; t < p.n(); ++t)
    if (std::fabs(p.values[t] - y0) <= h * k.support_radius) {
      sub.values.push_back(p.values[t]);
      ysub.push_back(y[t]);
    }
  REQUIRE(sub.values.size() > 10);

  const NWFit full = nw_fit(p, y, k, h, at);
  const NWFit local = nw_fit(sub, ysub, k, h, at);
  CHECK(full.numerator[0] == local.numerator[0]);  // identical terms, identical order
  CHECK(full.denominator[0] == local.denominator[0]);
  CHECK(full.estimate[0] == local.estimate[0]);
}

TEST_CASE("empty windows are flagged, never divided through", "[regression]") {
  Path p;
  for (int i = 0; i < 32; ++i) p.values.push_back(100.0 + 0.01 * i);
  std::vector<double> y(p.n(), 1.0);
  const Kernel k = Kernel::make(KernelId::epanechnikov);

  // grid far away from the data: no window ever fills
  CHECK_THROWS_AS(nw_fit(p, y, k, 0.3, UniformGrid::over(5.0, 1.0)), fit_failed);
  CHECK_THROWS_AS(nw_uniform_error(p, y, RegressionFunction::polynomial({1.0}), k, 0.3,
                                   UniformGrid::over(5.0, 1.0)),
                  fit_failed);

  // grid straddling the data: defined inside, undefined outside
  const UniformGrid g{95.0, 0.05, 201};  // 95 .. 105
  const NWFit fit = nw_fit(p, y, k, 0.3, g);
  CHECK(fit.defined_count > 0);
  CHECK(fit.defined_count < g.count);
  for (std::size_t j = 0; j < fit.defined.size(); ++j)
    if (!fit.defined[j]) CHECK(fit.estimate[j] == 0.0);

  const UniformErrorResult err =
      nw_uniform_error(p, y, RegressionFunction::polynomial({1.0}), k, 0.3, g);
  CHECK(err.fraction_undefined > 0.0);
  CHECK(err.fraction_undefined ==
        1.0 - static_cast<double>(fit.defined_count) / static_cast<double>(g.count));
}

TEST_CASE("streaming and materialized uniform error coincide", "[regression]") {
  const Path p = gen_random_walk(512, {}, 79);
  Rng rng(80);
  const auto truth = RegressionFunction::rational(3.0);
  std::vector<double> y(p.n());
  for (std::size_t t = 0; t < p.n(); ++t) y[t] = truth(p.values[t]) + 0.4 * rng.normal();
  const Kernel k = Kernel::make(KernelId::epanechnikov);
  const UniformGrid g = UniformGrid::over(9.0, 0.22);

  const UniformErrorResult a = uniform_error(nw_fit(p, y, k, 0.45, g), truth);
  const UniformErrorResult b = nw_uniform_error(p, y, truth, k, 0.45, g);
  CHECK(a.sup_error == b.sup_error);
  CHECK(a.index == b.index);
  CHECK(a.at == b.at);
  CHECK(a.defined_count == b.defined_count);
  CHECK(a.fraction_undefined == b.fraction_undefined);
}

TEST_CASE("error decomposition reconstructs the fit error", "[regression]") {
  const Path p = gen_mixing_ar(700, 0.7, {}, 81);
  Rng rng(82);
  const auto truth = RegressionFunction::logistic(1.0, 3.0);
  std::vector<double> u(p.n()), y(p.n());
  for (std::size_t t = 0; t < p.n(); ++t) {
    u[t] = 0.5 * rng.normal();
    y[t] = truth(p.values[t]) + u[t];
  }
  const Kernel k = Kernel::make(KernelId::epanechnikov);
  const double h = 0.4;  // keep rh within the local smoothness window
  const UniformGrid g = UniformGrid::over(2.5, 0.06);

  const ErrorDecomposition dec = error_decomposition(p, y, u, truth, k, h, g);
  const NWFit fit = nw_fit(p, y, k, h, g);
  REQUIRE(dec.defined == fit.defined);

  const double bias_cap = truth.holder_C() * std::pow(k.support_radius * h, truth.holder_alpha());
  for (std::int64_t j = 0; j < g.count; ++j) {
    const auto idx = static_cast<std::size_t>(j);
    if (!dec.defined[idx]) continue;
    const double total = fit.estimate[idx] - truth(g.point(j));
    CHECK(std::fabs(dec.theta1[idx] + dec.theta2[idx] - total) <= 1e-10 * std::max(1.0, std::fabs(total)));
    CHECK(std::fabs(dec.theta2[idx]) <= bias_cap * truth.envelope(g.point(j)) * (1.0 + 1e-9));
  }
}

TEST_CASE("decomposition degenerate inputs collapse the right term", "[regression]") {
  const Path p = gen_random_walk(300, {}, 83);
  const Kernel k = Kernel::make(KernelId::triangular);
  const UniformGrid g = UniformGrid::over(6.0, 0.3);

  // u = 0: the stochastic term vanishes identically
  const auto line = RegressionFunction::polynomial({0.0, 1.0});
  std::vector<double> u0(p.n(), 0.0), yline(p.n());
  for (std::size_t t = 0; t < p.n(); ++t) yline[t] = p.values[t];
  const ErrorDecomposition d0 = error_decomposition(p, yline, u0, line, k, 0.5, g);
  for (std::size_t j = 0; j < d0.theta1.size(); ++j)
    if (d0.defined[j]) CHECK(d0.theta1[j] == 0.0);

  // constant m: the bias term vanishes to rounding
  const auto flat = RegressionFunction::polynomial({4.0});
  Rng rng(84);
  std::vector<double> u(p.n()), y(p.n());
  for (std::size_t t = 0; t < p.n(); ++t) {
    u[t] = rng.normal();
    y[t] = 4.0 + u[t];
  }
  const ErrorDecomposition dc = error_decomposition(p, y, u, flat, k, 0.5, g);
  for (std::size_t j = 0; j < dc.theta2.size(); ++j)
    if (dc.defined[j]) CHECK(std::fabs(dc.theta2[j]) < 1e-12);
}

TEST_CASE("decomposition validates its own premises", "[regression]") {
  const Path p = gen_random_walk(100, {}, 85);
  const auto truth = RegressionFunction::logistic(1.0, 3.0);
  std::vector<double> u(p.n(), 0.0), y(p.n());
  for (std::size_t t = 0; t < p.n(); ++t) y[t] = truth(p.values[t]);
  const UniformGrid g = UniformGrid::over(5.0, 0.5);

  CHECK_THROWS_AS(
      error_decomposition(p, y, u, truth, Kernel::make(KernelId::gaussian), 0.5, g),
      std::invalid_argument);

  std::vector<double> ybad = y;
  ybad[10] += 0.5;  // breaks y = m(x) + u
  CHECK_THROWS_AS(
      error_decomposition(p, ybad, u, truth, Kernel::make(KernelId::epanechnikov), 0.5, g),
      std::invalid_argument);

  std::vector<double> ushort(p.n() - 1, 0.0);
  CHECK_THROWS_AS(
      error_decomposition(p, y, ushort, truth, Kernel::make(KernelId::epanechnikov), 0.5, g),
      std::invalid_argument);
}

TEST_CASE("fit rejects malformed inputs", "[regression]") {
  const Path p = gen_random_walk(64, {}, 86);
  std::vector<double> y(p.n(), 1.0);
  const Kernel k = Kernel::make(KernelId::epanechnikov);
  const UniformGrid g = UniformGrid::over(4.0, 0.5);

  CHECK_THROWS_AS(nw_fit(p, y, k, 0.0, g), std::invalid_argument);
  std::vector<double> yshort(p.n() - 1, 1.0);
  CHECK_THROWS_AS(nw_fit(p, yshort, k, 0.5, g), std::invalid_argument);
  CHECK_THROWS_AS(nw_fit(Path{}, {}, k, 0.5, g), std::invalid_argument);
  UniformGrid big;
  big.lo = -1.0;
  big.step = 1e-9;
  big.count = materialize_cap + 1;
  CHECK_THROWS_AS(nw_fit(p, y, k, 0.5, big), std::invalid_argument);
}
