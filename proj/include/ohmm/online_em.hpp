#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ohmm/hmm.hpp"
#include "ohmm/matrix.hpp"

namespace ohmm {

/// gamma_t = 1 / t^alpha, 0.5 < alpha <= 1. Converges to a stationary point.
struct DecayingForgetting {
  double alpha = 0.9;
};
/// Constant gamma in (0, 1): an adaptive, non-converging estimator.
struct FixedForgetting {
  double gamma = 0.002;
};
/// Constant gamma chosen so the latest `k` observations carry weight `r`.
struct RkForgetting {
  double r = 0.9;
  std::uint64_t k = 1000;
};
/// gamma_i = base * pi_bar_i applied to statistics of transitions into state i.
struct PerStateForgetting {
  double base_gamma = 0.01;
};

using ForgettingPolicy = std::variant<DecayingForgetting, FixedForgetting, RkForgetting, PerStateForgetting>;

/// Throws DomainError on out-of-range policy parameters.
void validate_policy(const ForgettingPolicy& policy);

/// "decaying:0.9", "fixed:0.002", "rk:0.9,1000", "per-state:0.01".
std::string policy_name(const ForgettingPolicy& policy);
ForgettingPolicy parse_policy(std::string_view text);

/// gamma with gamma * sum_{i=0}^{K} (1-gamma)^i = R, i.e. 1 - (1-R)^(1/(K+1)).
double gamma_from_rk(double r, std::uint64_t k);

/// Lower clamp for per-state forgetting factors.
inline constexpr double kGammaFloor = 1e-6;
inline constexpr std::uint64_t kDefaultBurnIn = 50;
inline constexpr double kDefaultInitialStay = 0.9;

struct OnlineEstimatorState {
  std::vector<double> phi;         ///< filter phi_t
  Tensor3 rho;                     ///< auxiliary statistics rho_t(i, j, k)
  TransitionMatrix q_hat;          ///< current estimate
  std::uint64_t t = 0;             ///< steps applied (phi is at time t)
  std::uint64_t burn_in = kDefaultBurnIn;
  std::vector<double> eta;         ///< expected entries into each state so far
  std::vector<double> pi_bar;      ///< running average of stationary laws
  std::vector<double> pi_current;  ///< stationary law of q_hat
  ForgettingPolicy policy;
  std::uint64_t frozen_rows = 0;             ///< M-step rows left unchanged (zero statistics)
  std::uint64_t degenerate_observations = 0;
  bool stationary_unique = true;

  std::size_t size() const { return phi.size(); }
};

/// phi_0 from filter_init, rho_0 = 0, q_hat = q0, eta = 0.
OnlineEstimatorState online_init(std::span<const double> pi, const EmissionModel& em, double y0,
                                 const TransitionMatrix& q0, const ForgettingPolicy& policy,
                                 std::uint64_t burn_in = kDefaultBurnIn);

/// Forgetting factors for step t -> t+1, one per state index.
std::vector<double> resolve_gamma(const ForgettingPolicy& policy, const OnlineEstimatorState& state);

/// One E-step (phi, rho) with q_hat_t, then the M-step when t >= burn_in,
/// then the event accumulators.
OnlineEstimatorState online_step(OnlineEstimatorState state, const EmissionModel& em, double y);

namespace detail {
struct OnlineWorkspace {
  std::vector<double> gamma, logg, pred, r, s;
  Tensor3 next_rho;

  explicit OnlineWorkspace(std::size_t m = 0)
      : gamma(m), logg(m), pred(m), r(m * m), s(m * m), next_rho(m) {}
};
}  // namespace detail

/// In-place streaming wrapper with preallocated scratch; O(m^4) per step.
class OnlineEstimator {
 public:
  OnlineEstimator(OnlineEstimatorState state, const EmissionModel& em);

  void step(double y);
  const OnlineEstimatorState& state() const { return state_; }
  OnlineEstimatorState& mutable_state() { return state_; }

 private:
  OnlineEstimatorState state_;
  const EmissionModel* em_;
  detail::OnlineWorkspace workspace_;
};

/// sum_{j != i} pi_j q(j, i) for every i, with pi the stationary law of q.
std::vector<double> entry_rates(const TransitionMatrix& q);

/// Expected entries into each state so far (the eta accumulators).
std::vector<double> accumulate_events(const OnlineEstimatorState& state);

struct TurnCounts {
  double left = 0.0;
  double right = 0.0;
};

/// (eta_LT, eta_RT) under the canonical three-state labeling.
TurnCounts turn_counts(const OnlineEstimatorState& state);

/// Versioned JSON snapshot; doubles are written in shortest round-trip form
/// so a restored state continues bit-identically.
std::string to_snapshot(const OnlineEstimatorState& state);
OnlineEstimatorState from_snapshot(std::string_view json_text);

}  // namespace ohmm
