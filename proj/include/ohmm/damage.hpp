#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ohmm/matrix.hpp"

namespace ohmm {

/// Strict alternation of local extrema. Plateaus collapse to their first
/// index; the first and last samples are kept. A constant load gives an
/// empty sequence.
std::vector<double> turning_points(std::span<const double> load);

struct RainflowCycle {
  double rfc_min = 0.0;
  double max = 0.0;
  std::size_t max_index = 0;  ///< sample index of the maximum in the load
  double range() const { return max - rfc_min; }
};

/// Rainflow cycles, one per local maximum of the turning-point sequence
/// (excluding a maximum at the very first point). For a maximum M the
/// backward minimum m- is taken back to the last point >= M (or the start);
/// the forward minimum m+ up to the first point > M. rfc_min = max(m-, m+),
/// and rfc_min = m- when the load never exceeds M afterwards.
///
/// With this convention #{cycles: rfc_min < u, max > v} equals the number of
/// upcrossings of [u, v] for every u < v. Linear time.
std::vector<RainflowCycle> rainflow_count(std::span<const double> load);

struct DamageParams {
  double alpha = 1.0;
  double beta = 3.0;
  /// Throws DomainError unless alpha > 0 and beta > 1.
  void validate() const;
};

/// Palmgren-Miner damage alpha * sum h^beta.
double pm_damage(std::span<const RainflowCycle> cycles, const DamageParams& params);

/// rainflow_count followed by pm_damage.
double rainflow_damage(std::span<const double> load, const DamageParams& params);

/// Number of completed upcrossings from below u to above v. Requires u < v.
std::size_t interval_upcross_count(std::span<const double> load, double u, double v);

enum class TurnLabel { Left, Right };

/// A turn occupying samples [start, stop).
struct TurnEvent {
  TurnLabel label = TurnLabel::Left;
  std::size_t start = 0;
  std::size_t stop = 0;
};

/// Maximal runs of the LT or RT state in a three-state path, dropping runs
/// shorter than `min_duration` samples.
std::vector<TurnEvent> extract_events(std::span<const std::size_t> path, std::size_t min_duration = 1);

/// [0, e1, 0, e2, ..., 0] with e = max over the interval for a left turn and
/// min for a right turn. Events must be non-empty, in bounds, ordered and
/// disjoint (InputError otherwise).
std::vector<double> reduce_load(std::span<const double> load, std::span<const TurnEvent> events);

/// Distributions of the turn extremes: P(M1 > v) for left-turn maxima and
/// P(m1 < u) for right-turn minima.
class TailModel {
 public:
  enum class Backend { Empirical, Rayleigh };

  /// Right-continuous empirical survival functions; P(M1 > v) = 1 for v <= 0
  /// and P(m1 < u) = 1 for u >= 0. Empty samples give identically zero tails
  /// away from 0.
  static TailModel empirical(std::vector<double> maxima, std::vector<double> minima);
  /// P(M1 > v) = exp(-(v/s_up)^2/2), P(m1 < u) = exp(-(u/s_down)^2/2).
  static TailModel rayleigh(double scale_up, double scale_down);

  Backend backend() const { return backend_; }
  double scale_up() const { return scale_up_; }
  double scale_down() const { return scale_down_; }
  /// True when a Rayleigh fit was requested but there were too few extremes.
  bool fallback() const { return fallback_; }
  void set_fallback(bool f) { fallback_ = f; }

  double upper(double v) const;
  double lower(double u) const;

  /// Smallest v >= 0 beyond which upper(v) < eps (0 if the tail is empty).
  double upper_cutoff(double eps) const;
  /// Smallest w >= 0 such that lower(u) < eps for u < -w.
  double lower_cutoff(double eps) const;

 private:
  Backend backend_ = Backend::Empirical;
  std::vector<double> maxima_;  // ascending
  std::vector<double> minima_;  // ascending
  double scale_up_ = 0.0;
  double scale_down_ = 0.0;
  bool fallback_ = false;
};

/// Positive and negative entries of a reduced load (zeros dropped).
struct Extremes {
  std::vector<double> maxima;
  std::vector<double> minima;
};
Extremes split_extremes(std::span<const double> reduced);

TailModel empirical_tails(std::span<const double> reduced);

/// Method-of-moments Rayleigh scales s = sqrt(mean(x^2)/2). Needs at least
/// 10 positive and 10 negative extremes; otherwise returns empirical tails
/// with fallback() set.
TailModel fit_rayleigh_tails(std::span<const double> reduced);

/// Turn-label indices of the 2x2 turn chain.
inline constexpr std::size_t kTurnLT = 0;
inline constexpr std::size_t kTurnRT = 1;

/// Chain of successive turn labels, p(k, j) = P(next turn j | turn k).
struct TurnChain {
  TransitionMatrix p;
  std::vector<double> pi;  ///< stationary law over (LT, RT)
};

/// Turn chain implied by a three-state driving matrix. Throws DomainError if
/// any state is absorbing.
TurnChain turn_chain_from_q(const TransitionMatrix& q);

/// P(LT -> RT) summed over the paths LT -> SF* -> RT and LT -> RT; equals
/// 1 - p(LT, LT).
double turn_chain_lt_rt_paths(const TransitionMatrix& q);

struct HittingProbabilities {
  double p1 = 0.0;
  double p2 = 0.0;
  bool singular = false;  ///< system singular; both reported as 0
};

/// Solves p_j = p(j,1) P(M1>v) + P(M1<=v) p(j,1) p1 + P(m1>=u) p(j,2) p2,
/// j = 1 (LT), 2 (RT). Requires u <= 0 <= v.
HittingProbabilities solve_p2(const TurnChain& chain, const TailModel& tails, double u, double v);

/// Intensity of upcrossings of [u, v] by the reduced load per reduced-load
/// step (two steps per turn). Requires u <= v.
double osc_intensity(const TurnChain& chain, const TailModel& tails, double u, double v);

struct QuadratureConfig {
  std::size_t nodes = 201;        ///< midpoints per axis in each region
  double tail_cutoff = 1e-12;     ///< tails truncated below this value
  double divergence_ratio = 0.01; ///< remainder / integral that sets the flag
};

struct DamageIntensity {
  double per_step = 0.0;   ///< beta(beta-1) * double integral of mu_osc
  double per_turn = 0.0;   ///< 2 * per_step
  double remainder = 0.0;  ///< estimate of the truncated tail contribution
  bool diverged = false;
  std::size_t singular_nodes = 0;
};

/// Expected damage per turn event, alpha * beta(beta-1) * integral over u < v
/// of (v-u)^(beta-2) mu_osc(u, v), per turn.
DamageIntensity damage_intensity(const TurnChain& chain, const TailModel& tails, const DamageParams& params,
                                 const QuadratureConfig& config = {});

struct FrameDamage {
  std::vector<double> delta_eta;
  std::vector<double> delta_damage;
  std::vector<double> cumulative;
  double total = 0.0;
};

/// `eta` holds the cumulative expected turn count at the end of each frame
/// and `d` the damage per turn for each frame; the count before the first
/// frame is `eta_start`. Throws InputError if eta decreases.
FrameDamage frame_damage(std::span<const double> eta, std::span<const double> d, double eta_start = 0.0);

}  // namespace ohmm
