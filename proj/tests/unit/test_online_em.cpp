#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "ohmm/errors.hpp"
#include "ohmm/online_em.hpp"
#include "ohmm/simulator.hpp"

using namespace ohmm;

namespace {

constexpr std::uint64_t kNever = std::numeric_limits<std::uint64_t>::max();

std::vector<double> city_stream(std::size_t n, std::uint64_t seed) {
  RegimeSchedule sched{{{"city", q_city(), n}}};
  const auto path = simulate_chain(sched, start_straight(), seed);
  return simulate_observations(path, paper_emission_model(), seed + 1000);
}

}  // namespace

TEST_CASE("forgetting factor from (R, K)") {
  CHECK(gamma_from_rk(0.9, 200) == doctest::Approx(0.01).epsilon(0.15));
  CHECK(gamma_from_rk(0.9, 1000) == doctest::Approx(0.002).epsilon(0.15));
  CHECK(gamma_from_rk(0.9, 2400) == doctest::Approx(0.001).epsilon(0.15));
  CHECK(gamma_from_rk(0.8, 2000) == doctest::Approx(0.0008).epsilon(0.15));
  CHECK(gamma_from_rk(0.37, 0) == 0.37);
  for (std::uint64_t k : {1u, 10u, 333u, 5000u}) {
    const double g = gamma_from_rk(0.9, k);
    double weight = 0.0;
    for (std::uint64_t i = 0; i <= k; ++i) weight += g * std::pow(1.0 - g, static_cast<double>(i));
    CHECK(weight == doctest::Approx(0.9).epsilon(1e-12));
  }
  CHECK_THROWS_AS(gamma_from_rk(1.0, 10), DomainError);
  CHECK_THROWS_AS(gamma_from_rk(0.0, 10), DomainError);
}

TEST_CASE("policy names round-trip") {
  for (const char* s : {"decaying:0.9", "fixed:0.002", "rk:0.9,1000", "per-state:0.01"}) {
    CHECK(policy_name(parse_policy(s)) == s);
  }
  CHECK_THROWS_AS(parse_policy("fixed:1.5"), DomainError);
  CHECK_THROWS_AS(parse_policy("decaying:0.4"), DomainError);
  CHECK_THROWS_AS(parse_policy("rk:0.9,10.5"), DomainError);
  CHECK_THROWS_AS(parse_policy("fixed"), InputError);
  CHECK_THROWS_AS(parse_policy("sliding:3"), InputError);
  CHECK_THROWS_AS(parse_policy("fixed:abc"), InputError);
}

TEST_CASE("resolved forgetting factors") {
  const auto em = paper_emission_model();
  auto st = online_init(uniform_vector(3), em, 0.0, q_city(), FixedForgetting{0.002});
  st.t = 12345;
  for (double g : resolve_gamma(FixedForgetting{0.002}, st)) CHECK(g == 0.002);
  st.t = 99;
  for (double g : resolve_gamma(DecayingForgetting{0.9}, st)) CHECK(g == doctest::Approx(0.01585).epsilon(1e-3));
  st.t = 0;
  for (double g : resolve_gamma(DecayingForgetting{0.9}, st)) CHECK(g == 1.0);
  st.pi_bar = {1.0 / 6, 2.0 / 3, 1.0 / 6};
  const auto ps = resolve_gamma(PerStateForgetting{0.01}, st);
  CHECK(ps[0] == doctest::Approx(0.001667).epsilon(1e-3));
  CHECK(ps[1] == doctest::Approx(0.006667).epsilon(1e-3));
  CHECK(ps[2] == doctest::Approx(0.001667).epsilon(1e-3));
  st.pi_bar = {0.0, 1.0, 0.0};
  CHECK(resolve_gamma(PerStateForgetting{0.01}, st)[0] == kGammaFloor);
}

TEST_CASE("initial state") {
  const auto st = online_init(uniform_vector(3), paper_emission_model(), 0.3, q_city(), FixedForgetting{});
  for (double v : st.rho.data()) CHECK(v == 0.0);
  for (double v : st.eta) CHECK(v == 0.0);
  CHECK(st.t == 0);
  CHECK(st.q_hat == q_city());
}

TEST_CASE("online E-step with 1/t forgetting equals the batch E-step") {
  const auto em = paper_emission_model();
  const auto y = city_stream(400, 3);
  const auto q = TransitionMatrix::persistent(3, 0.8);
  const std::vector<double> pi{0.25, 0.5, 0.25};
  auto st = online_init(pi, em, y[0], q, DecayingForgetting{1.0}, kNever);
  for (std::size_t t = 1; t < y.size(); ++t) st = online_step(st, em, y[t]);
  const auto batch = expected_transition_stats(y, q, em, pi);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < 3; ++k) s += st.phi[k] * st.rho(i, j, k);
      CHECK(s == doctest::Approx(batch.s(i, j)).epsilon(1e-12));
    }
  }
  CHECK(st.q_hat == q);
}

TEST_CASE("in-place estimator matches the functional step") {
  const auto em = paper_emission_model();
  const auto y = city_stream(300, 4);
  auto a = online_init(uniform_vector(3), em, y[0], TransitionMatrix::persistent(3, 0.9), PerStateForgetting{0.01}, 20);
  OnlineEstimator b(a, em);
  for (std::size_t t = 1; t < y.size(); ++t) {
    a = online_step(a, em, y[t]);
    b.step(y[t]);
  }
  CHECK(a.q_hat == b.state().q_hat);
  CHECK(a.rho == b.state().rho);
  CHECK(a.eta == b.state().eta);
}

TEST_CASE("expected event counts") {
  const auto em = paper_emission_model();
  const auto y = city_stream(1001, 5);
  SUBCASE("fixed city matrix gives 25 turns per 1000 steps") {
    OnlineEstimator est(online_init(uniform_vector(3), em, y[0], q_city(), FixedForgetting{}, kNever), em);
    for (std::size_t t = 1; t <= 1000; ++t) est.step(y[t]);
    const auto c = turn_counts(est.state());
    CHECK(c.left == doctest::Approx(25.0).epsilon(1e-10));
    CHECK(c.right == doctest::Approx(25.0).epsilon(1e-10));
    const auto rates = entry_rates(q_city());
    CHECK(rates[kLT] == doctest::Approx(0.025).epsilon(1e-12));
    CHECK(rates[kSF] == doctest::Approx(1.0 / 6 * 0.1 * 2).epsilon(1e-12));
  }
  SUBCASE("identity matrix gives no events") {
    const TransitionMatrix id{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    OnlineEstimator est(online_init(uniform_vector(3), em, y[0], id, FixedForgetting{}, kNever), em);
    for (std::size_t t = 1; t <= 200; ++t) est.step(y[t]);
    for (double v : accumulate_events(est.state())) CHECK(v == 0.0);
  }
}

TEST_CASE("single state") {
  const EmissionModel one({{0.0, 0.0, 1.0, 1.0}});
  OnlineEstimator est(online_init(std::vector<double>{1.0}, one, 0.1, TransitionMatrix({{1.0}}), FixedForgetting{}, 0),
                      one);
  for (int t = 0; t < 100; ++t) est.step(0.01 * t);
  CHECK(est.state().q_hat(0, 0) == 1.0);
  CHECK_THROWS_AS(turn_counts(est.state()), DomainError);
}

TEST_CASE("fixed forgetting tracks the city matrix") {
  const auto em = paper_emission_model();
  const auto y = city_stream(40000, 6);
  OnlineEstimator est(online_init(uniform_vector(3), em, y[0], TransitionMatrix::persistent(3, 0.9),
                                  FixedForgetting{0.002}),
                      em);
  Matrix avg(3, 3);
  std::size_t n = 0;
  for (std::size_t t = 1; t < y.size(); ++t) {
    est.step(y[t]);
    if (t >= 20000) {
      for (std::size_t i = 0; i < 9; ++i) avg.data()[i] += est.state().q_hat.matrix().data()[i];
      ++n;
    }
  }
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(avg(i, j) / n - q_city()(i, j)) < 0.03);
  }
  CHECK(est.state().frozen_rows == 0);
}

TEST_CASE("burn-in holds the initial matrix") {
  const auto em = paper_emission_model();
  const auto y = city_stream(100, 7);
  const auto q0 = TransitionMatrix::persistent(3, 0.9);
  OnlineEstimator est(online_init(uniform_vector(3), em, y[0], q0, FixedForgetting{0.01}, 50), em);
  for (std::size_t t = 1; t <= 50; ++t) est.step(y[t]);
  CHECK(est.state().q_hat == q0);
  est.step(y[51]);
  CHECK_FALSE(est.state().q_hat == q0);
}

TEST_CASE("snapshots restore bit-identically") {
  const auto em = paper_emission_model();
  const auto y = city_stream(1000, 8);
  for (const ForgettingPolicy& policy : std::vector<ForgettingPolicy>{
           FixedForgetting{0.002}, DecayingForgetting{0.9}, RkForgetting{0.9, 1000}, PerStateForgetting{0.01}}) {
    OnlineEstimator a(online_init(uniform_vector(3), em, y[0], TransitionMatrix::persistent(3, 0.9), policy), em);
    for (std::size_t t = 1; t < 500; ++t) a.step(y[t]);
    const auto text = to_snapshot(a.state());
    OnlineEstimator b(from_snapshot(text), em);
    CHECK(to_snapshot(b.state()) == text);
    for (std::size_t t = 500; t < y.size(); ++t) {
      a.step(y[t]);
      b.step(y[t]);
    }
    CAPTURE(policy_name(policy));
    CHECK(a.state().q_hat == b.state().q_hat);
    CHECK(a.state().rho == b.state().rho);
    CHECK(a.state().phi == b.state().phi);
    CHECK(a.state().eta == b.state().eta);
    CHECK(a.state().pi_bar == b.state().pi_bar);
  }
  CHECK_THROWS_AS(from_snapshot("{not json"), InputError);
  CHECK_THROWS_AS(from_snapshot(R"({"version": 99})"), InputError);
}
