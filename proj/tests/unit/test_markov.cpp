#include <cmath>
#include <vector>

#include "doctest.h"
#include "ohmm/errors.hpp"
#include "ohmm/markov.hpp"
#include "ohmm/matrix.hpp"
#include "ohmm/rng.hpp"
#include "ohmm/simulator.hpp"

using namespace ohmm;

namespace {

TransitionMatrix random_q(Rng& rng, std::size_t m) {
  Matrix a(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) s += a(i, j) = rng.uniform_open();
    for (std::size_t j = 0; j < m; ++j) a(i, j) /= s;
  }
  return TransitionMatrix(a);
}

}  // namespace

TEST_CASE("transition matrix validation") {
  CHECK_THROWS_AS(TransitionMatrix({{0.5, 0.4}, {0.5, 0.5}}), DomainError);
  CHECK_THROWS_AS(TransitionMatrix({{1.2, -0.2}, {0.5, 0.5}}), DomainError);
  CHECK_THROWS_AS(TransitionMatrix(Matrix(2, 3, 0.5)), DomainError);
  CHECK_NOTHROW(TransitionMatrix({{1.0, 0.0}, {0.3, 0.7}}));
  const auto p = TransitionMatrix::persistent(3, 0.9);
  CHECK(p(0, 0) == doctest::Approx(0.9));
  CHECK(p(0, 2) == doctest::Approx(0.05));
  CHECK(p.max_row_defect() < 1e-15);
  CHECK_THROWS_AS(validate_probability_vector(std::vector<double>{0.5, 0.6}), DomainError);
}

TEST_CASE("stationary laws of the driving matrices") {
  const auto city = stationary_distribution(q_city());
  CHECK(city.unique);
  CHECK(city.pi[0] == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  CHECK(city.pi[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(city.pi[2] == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  const auto highway = stationary_distribution(q_highway());
  CHECK(highway.pi[0] == doctest::Approx(1.0 / 18.0).epsilon(1e-12));
  CHECK(highway.pi[1] == doctest::Approx(8.0 / 9.0).epsilon(1e-12));
  CHECK(highway.pi[2] == doctest::Approx(1.0 / 18.0).epsilon(1e-12));
  const auto u = stationary_distribution(TransitionMatrix::uniform(4));
  for (double v : u.pi) CHECK(v == doctest::Approx(0.25));
}

TEST_CASE("pi Q = pi on random chains") {
  Rng rng(3);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t m = 2 + rep % 7;
    const auto q = random_q(rng, m);
    const auto res = stationary_distribution(q);
    CHECK(res.unique);
    double total = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      double v = 0.0;
      for (std::size_t i = 0; i < m; ++i) v += res.pi[i] * q(i, j);
      CHECK(v == doctest::Approx(res.pi[j]).epsilon(1e-10));
      CHECK(res.pi[j] >= 0.0);
      total += res.pi[j];
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    std::vector<double> into(m);
    CHECK(stationary_distribution_into(q, into));
    for (std::size_t j = 0; j < m; ++j) CHECK(into[j] == doctest::Approx(res.pi[j]).epsilon(1e-12));
  }
}

TEST_CASE("reducible and periodic chains") {
  const auto id = stationary_distribution(TransitionMatrix({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}));
  CHECK_FALSE(id.unique);
  for (double v : id.pi) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-9));

  // Two closed classes {0} and {1, 2}.
  const auto split = stationary_distribution(TransitionMatrix({{1, 0, 0}, {0, 0.5, 0.5}, {0, 0.5, 0.5}}));
  CHECK_FALSE(split.unique);
  double total = 0.0;
  for (double v : split.pi) total += v;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));

  const auto flip = stationary_distribution(TransitionMatrix({{0, 1}, {1, 0}}));
  CHECK(flip.unique);
  CHECK(flip.pi[0] == doctest::Approx(0.5));
}
