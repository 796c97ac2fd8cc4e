#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "ohmm/errors.hpp"
#include "ohmm/gal.hpp"

using namespace ohmm;

namespace {

const GalParams kRT{-1.0, -0.5, 10.0, 0.2};
const GalParams kSF{0.0, 0.0, 0.5, 1.0};
const GalParams kLT{1.0, 0.5, 10.0, 0.2};

struct Moments {
  double mean, var, skew;
};

Moments moments(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  double m = 0.0;
  for (double v : x) m += v;
  m /= n;
  double m2 = 0.0, m3 = 0.0;
  for (double v : x) {
    m2 += (v - m) * (v - m);
    m3 += (v - m) * (v - m) * (v - m);
  }
  m2 /= n;
  m3 /= n;
  return {m, m2 * n / (n - 1.0), m3 / std::pow(m2, 1.5)};
}

}  // namespace

TEST_CASE("closed form matches the mixture integral") {
  for (const auto& p : {kRT, kSF, kLT, GalParams{0.3, 0.2, 1.0, 0.7}, GalParams{0.0, -1.0, 2.5, 0.5}}) {
    for (double dy : {-2.0, -0.6, -0.2, -0.05, 0.03, 0.15, 0.5, 1.1, 2.4}) {
      const double y = p.delta + dy;
      const double ref = testing::mixture_pdf(p, y);
      if (ref < 1e-200) continue;
      CAPTURE(p.nu);
      CAPTURE(y);
      CHECK(gal_pdf(p, y) == doctest::Approx(ref).epsilon(1e-8));
    }
  }
}

TEST_CASE("centered symmetric GAL is even") {
  const GalParams p{0.0, 0.0, 0.5, 1.0};
  CHECK(gal_pdf(p, 1.3) - gal_pdf(p, -1.3) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("density integrates to one") {
  // A lot of mass sits within rounding distance of a singular center, so
  // integrate in the offset x = y - delta (delta = 0) with x = s^5.
  boost::math::quadrature::tanh_sinh<double> ts;
  for (auto p : {kRT, kSF, kLT}) {
    p.delta = 0.0;
    double total = 0.0;
    for (double side : {-1.0, 1.0}) {
      auto f = [&](double s) {
        const double x = side * s * s * s * s * s;
        if (x == 0.0) return 0.0;
        return 5.0 * s * s * s * s * gal_pdf(p, x);
      };
      total += ts.integrate(f, 0.0, std::pow(60.0, 0.2), 1e-14);
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("value at the center") {
  // Finite when 1/nu > 1/2: Gamma(1/nu - 1/2) / (Gamma(1/nu) sqrt(2 pi) sigma) * (2/c2^2)^(1/nu - 1/2)
  // with c2^2 = 2 + mu^2/sigma^2. Otherwise the mixture integral diverges.
  const GalParams p{0.5, 0.3, 0.4, 0.8};
  const double a = 1.0 / p.nu;
  const double c2sq = 2.0 + p.mu * p.mu / (p.sigma * p.sigma);
  const double expected = std::tgamma(a - 0.5) / (std::tgamma(a) * std::sqrt(2.0 * std::numbers::pi) * p.sigma) *
                          std::pow(2.0 / c2sq, a - 0.5);
  CHECK(gal_pdf(p, p.delta) == doctest::Approx(expected).epsilon(1e-10));
  CHECK(gal_pdf(p, p.delta) == doctest::Approx(testing::mixture_pdf(p, p.delta)).epsilon(1e-8));
  CHECK(gal_logpdf(kRT, kRT.delta) == std::numeric_limits<double>::infinity());
  CHECK(std::isfinite(gal_logpdf(kSF, kSF.delta)));
  CHECK(gal_logpdf(GalParams{0.0, 0.0, 2.0, 1.0}, 0.0) == std::numeric_limits<double>::infinity());
}

TEST_CASE("parameter domain") {
  CHECK_THROWS_AS(gal_logpdf(GalParams{0, 0, 0.0, 1}, 0.1), DomainError);
  CHECK_THROWS_AS(gal_logpdf(GalParams{0, 0, 1.0, -1}, 0.1), DomainError);
  Rng rng(1);
  CHECK_THROWS_AS(gal_draw(GalParams{0, 0, -1.0, 1}, rng), DomainError);
}

TEST_CASE("sample moments") {
  const std::size_t n = 100000;
  SUBCASE("symmetric about delta") {
    Rng rng(11);
    const auto x = gal_sample(GalParams{2.0, 0.0, 1.0, 1.0}, rng, n);
    const auto m = moments(x);
    CHECK(std::abs(m.skew) < 3.0 * std::sqrt(6.0 / n));
  }
  SUBCASE("right-turn state") {
    Rng rng(12);
    const auto x = gal_sample(kRT, rng, n);
    const auto m = moments(x);
    CHECK(kRT.mean() == doctest::Approx(-1.05));
    CHECK(kRT.variance() == doctest::Approx(0.029));
    CHECK(std::abs(m.mean - kRT.mean()) < 3.0 * std::sqrt(kRT.variance() / n));
    // Var of the sample variance is (m4 - var^2)/n; m4 of GAL is large, so
    // use the empirical fourth moment.
    double m4 = 0.0;
    for (double v : x) m4 += std::pow(v - m.mean, 4);
    m4 /= n;
    CHECK(std::abs(m.var - kRT.variance()) < 3.0 * std::sqrt((m4 - m.var * m.var) / n));
  }
}

TEST_CASE("samples follow the density (KS)") {
  for (const auto& [p, seed] : {std::pair{kRT, 21}, std::pair{kSF, 22}, std::pair{kLT, 23}}) {
    Rng rng(seed);
    const auto x = gal_sample(p, rng, 10000);
    const double d = testing::ks_statistic(x, [&](double y) { return testing::mixture_cdf(p, y); });
    CAPTURE(p.delta);
    CHECK(testing::kolmogorov_pvalue(d, x.size()) > 0.01);
  }
}

TEST_CASE("KS detects a wrong distribution") {
  Rng rng(5);
  const auto x = gal_sample(kSF, rng, 10000);
  const double d = testing::ks_statistic(x, [&](double y) { return testing::mixture_cdf(GalParams{0.1, 0.0, 0.5, 1.0}, y); });
  CHECK(testing::kolmogorov_pvalue(d, x.size()) < 0.01);
}

TEST_CASE("maximum-likelihood fit") {
  SUBCASE("recovers the straight-driving parameters") {
    Rng rng(31);
    const auto x = gal_sample(kSF, rng, 100000);
    const auto fit = gal_fit_mle(x, gal_initial_guess(x));
    CHECK(std::abs(fit.params.delta) < 0.02);
    CHECK(std::abs(fit.params.mu) < 0.05);
    CHECK(fit.params.sigma == doctest::Approx(1.0).epsilon(0.05));
    CHECK(fit.params.nu == doctest::Approx(0.5).epsilon(0.15));
    CHECK(fit.loglik >= fit.init_loglik);
    CHECK_FALSE(fit.small_sample);
  }
  SUBCASE("starting at the truth never lowers the likelihood") {
    Rng rng(32);
    const auto x = gal_sample(kLT, rng, 2000);
    const auto fit = gal_fit_mle(x, kLT);
    CHECK(fit.loglik >= gal_loglik(kLT, x));
  }
  SUBCASE("small samples are flagged") {
    Rng rng(33);
    const auto x = gal_sample(kSF, rng, 50);
    CHECK(gal_fit_mle(x, kSF).small_sample);
  }
  SUBCASE("bad input") {
    std::vector<double> x{0.1, std::nan(""), 0.3};
    CHECK_THROWS_AS(gal_fit_mle(x, kSF), InputError);
    CHECK_THROWS_AS(gal_fit_mle(std::vector<double>{}, kSF), InputError);
  }
}
