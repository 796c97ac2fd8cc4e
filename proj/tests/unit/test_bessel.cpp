#include <boost/math/special_functions/bessel.hpp>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "ohmm/bessel.hpp"
#include "ohmm/errors.hpp"

using ohmm::bessel_k;
using ohmm::log_bessel_k;

TEST_CASE("K_1/2 closed form") {
  const double x = 1.0;
  const double exact = std::sqrt(std::numbers::pi / (2.0 * x)) * std::exp(-x);
  CHECK(bessel_k(0.5, x) == doctest::Approx(exact).epsilon(1e-14));
  CHECK(bessel_k(0.5, 1.0) == doctest::Approx(0.46106850).epsilon(1e-8));
  for (double z : {0.01, 0.3, 2.0, 7.5, 40.0}) {
    const double k = std::sqrt(std::numbers::pi / (2.0 * z)) * std::exp(-z);
    CHECK(bessel_k(0.5, z) == doctest::Approx(k).epsilon(1e-13));
    CHECK(bessel_k(1.5, z) == doctest::Approx(k * (1.0 + 1.0 / z)).epsilon(1e-13));
  }
}

TEST_CASE("symmetric in the order") {
  CHECK(bessel_k(0.7, 2.0) == doctest::Approx(bessel_k(-0.7, 2.0)).epsilon(1e-15));
  CHECK(bessel_k(-2.4, 0.5) == doctest::Approx(bessel_k(2.4, 0.5)).epsilon(1e-15));
}

TEST_CASE("K_0(10)") {
  const double ref = boost::math::cyl_bessel_k(0.0, 10.0);
  CHECK(bessel_k(0.0, 10.0) == doctest::Approx(ref).epsilon(1e-9));
  CHECK(bessel_k(0.0, 10.0) == doctest::Approx(1.778e-5).epsilon(1e-3));
}

TEST_CASE("agrees with boost over a grid") {
  for (double order : {0.0, 0.1, 0.25, 0.5, 0.9, 1.0, 1.6, 2.5, 4.3, 9.5}) {
    for (double x : {1e-4, 0.05, 0.5, 1.0, 1.99, 2.0, 2.01, 5.0, 25.0, 300.0}) {
      const double ref = boost::math::cyl_bessel_k(order, x);
      if (!std::isfinite(ref) || ref == 0.0) continue;
      CAPTURE(order);
      CAPTURE(x);
      CHECK(bessel_k(order, x) == doctest::Approx(ref).epsilon(1e-12));
      CHECK(log_bessel_k(order, x) == doctest::Approx(std::log(ref)).epsilon(1e-12));
    }
  }
}

TEST_CASE("log K where K leaves the double range") {
  // K_nu(x) ~ sqrt(pi/(2x)) exp(-x) for large x.
  const double x = 2000.0;
  const double approx = 0.5 * std::log(std::numbers::pi / (2.0 * x)) - x;
  CHECK(log_bessel_k(0.3, x) == doctest::Approx(approx).epsilon(1e-6));
  // K_nu(x) ~ Gamma(nu)/2 (2/x)^nu for small x.
  const double nu = 9.5;
  const double xs = 1e-40;
  const double small = std::lgamma(nu) - std::log(2.0) + nu * std::log(2.0 / xs);
  CHECK(log_bessel_k(nu, xs) == doctest::Approx(small).epsilon(1e-10));
}

TEST_CASE("domain") {
  CHECK_THROWS_AS(bessel_k(0.5, 0.0), ohmm::DomainError);
  CHECK_THROWS_AS(bessel_k(0.5, -1.0), ohmm::DomainError);
  CHECK_THROWS_AS(log_bessel_k(0.5, 0.0), ohmm::DomainError);
}

TEST_CASE("tiny arguments stay finite and continuous") {
  for (double nu : {0.0, 0.05, 0.4, 0.5, 1.0, 1.5, 9.5}) {
    CAPTURE(nu);
    for (double x : {1e-300, 1e-310, 5e-324}) CHECK(std::isfinite(log_bessel_k(nu, x)));
    const double above = log_bessel_k(nu, 1.0001e-150);
    const double below = log_bessel_k(nu, 0.9999e-150);
    const double slope = nu > 0.0 ? nu : 1.0 / (-std::log(0.5e-150) - 0.5772156649015329);
    CHECK(below - above == doctest::Approx(slope * std::log(1.0001 / 0.9999)).epsilon(1e-4));
  }
  CHECK(log_bessel_k(1.5, 1e-300) ==
        doctest::Approx(std::lgamma(1.5) - std::log(2.0) + 1.5 * std::log(2e300)).epsilon(1e-14));
}
