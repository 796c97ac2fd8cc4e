#include "ohmm/damage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "ohmm/errors.hpp"
#include "ohmm/hmm.hpp"
#include "ohmm/markov.hpp"

namespace ohmm {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kMinRayleighExtremes = 10;

void check_finite(std::span<const double> load) {
  for (const double x : load) {
    if (!std::isfinite(x)) throw InputError("load contains a non-finite value");
  }
}

struct StackEntry {
  std::size_t index;
  double segment_min;
};

double rayleigh_cutoff(double scale, double eps) { return scale * std::sqrt(2.0 * std::log(1.0 / eps)); }

// Indices of the turning points; plateaus keep their first index.
std::vector<std::size_t> turning_point_indices(std::span<const double> load) {
  check_finite(load);
  std::vector<std::size_t> d;
  d.reserve(load.size());
  for (std::size_t i = 0; i < load.size(); ++i) {
    if (d.empty() || load[i] != load[d.back()]) d.push_back(i);
  }
  if (d.size() < 2) return {};
  std::vector<std::size_t> tp;
  tp.push_back(d.front());
  for (std::size_t i = 1; i + 1 < d.size(); ++i) {
    if ((load[d[i]] - load[d[i - 1]]) * (load[d[i + 1]] - load[d[i]]) < 0.0) tp.push_back(d[i]);
  }
  tp.push_back(d.back());
  return tp;
}

}  // namespace

std::vector<double> turning_points(std::span<const double> load) {
  const auto idx = turning_point_indices(load);
  std::vector<double> tp(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) tp[i] = load[idx[i]];
  return tp;
}

std::vector<RainflowCycle> rainflow_count(std::span<const double> load) {
  const auto idx = turning_point_indices(load);
  const auto tp = turning_points(load);
  const std::size_t n = tp.size();
  if (n < 2) return {};

  // Minimum between each maximum and the previous point >= it.
  std::vector<double> back_min(n, kInf);
  std::vector<StackEntry> stack;
  stack.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double run = kInf;
    while (!stack.empty() && tp[stack.back().index] < tp[i]) {
      run = std::min(run, stack.back().segment_min);
      stack.pop_back();
    }
    back_min[i] = run;
    stack.push_back({i, std::min(run, tp[i])});
  }

  // Minimum between each maximum and the next point > it; NaN if none.
  std::vector<double> fwd_min(n, std::numeric_limits<double>::quiet_NaN());
  stack.clear();
  for (std::size_t i = n; i-- > 0;) {
    double run = kInf;
    while (!stack.empty() && tp[stack.back().index] <= tp[i]) {
      run = std::min(run, stack.back().segment_min);
      stack.pop_back();
    }
    if (!stack.empty()) fwd_min[i] = run;
    stack.push_back({i, std::min(run, tp[i])});
  }

  std::vector<RainflowCycle> cycles;
  cycles.reserve(n / 2 + 1);
  for (std::size_t i = 1; i < n; ++i) {
    if (!(tp[i] > tp[i - 1])) continue;
    const double lo = std::isnan(fwd_min[i]) ? back_min[i] : std::max(back_min[i], fwd_min[i]);
    cycles.push_back({lo, tp[i], idx[i]});
  }
  return cycles;
}

void DamageParams::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("damage alpha must be > 0");
  if (!(beta > 1.0) || !std::isfinite(beta)) throw DomainError("damage beta must be > 1");
}

double pm_damage(std::span<const RainflowCycle> cycles, const DamageParams& params) {
  params.validate();
  double total = 0.0;
  for (const auto& c : cycles) total += std::pow(c.range(), params.beta);
  return params.alpha * total;
}

double rainflow_damage(std::span<const double> load, const DamageParams& params) {
  return pm_damage(rainflow_count(load), params);
}

std::size_t interval_upcross_count(std::span<const double> load, double u, double v) {
  if (!(u < v)) throw DomainError("interval_upcross_count requires u < v");
  std::size_t count = 0;
  bool below = false;
  for (const double x : load) {
    if (x < u) {
      below = true;
    } else if (below && x > v) {
      ++count;
      below = false;
    }
  }
  return count;
}

std::vector<TurnEvent> extract_events(std::span<const std::size_t> path, std::size_t min_duration) {
  std::vector<TurnEvent> events;
  std::size_t i = 0;
  while (i < path.size()) {
    const std::size_t s = path[i];
    std::size_t j = i + 1;
    while (j < path.size() && path[j] == s) ++j;
    if ((s == kLT || s == kRT) && j - i >= min_duration) {
      events.push_back({s == kLT ? TurnLabel::Left : TurnLabel::Right, i, j});
    }
    i = j;
  }
  return events;
}

std::vector<double> reduce_load(std::span<const double> load, std::span<const TurnEvent> events) {
  std::vector<double> out;
  out.reserve(2 * events.size() + 1);
  out.push_back(0.0);
  std::size_t prev_stop = 0;
  for (std::size_t e = 0; e < events.size(); ++e) {
    const auto& ev = events[e];
    if (ev.start >= ev.stop) throw InputError("turn event " + std::to_string(e) + " is empty");
    if (ev.stop > load.size()) throw InputError("turn event " + std::to_string(e) + " exceeds the load length");
    if (e > 0 && ev.start < prev_stop) throw InputError("turn events overlap or are out of order");
    const auto first = load.begin() + static_cast<std::ptrdiff_t>(ev.start);
    const auto last = load.begin() + static_cast<std::ptrdiff_t>(ev.stop);
    out.push_back(ev.label == TurnLabel::Left ? *std::max_element(first, last) : *std::min_element(first, last));
    out.push_back(0.0);
    prev_stop = ev.stop;
  }
  return out;
}

TailModel TailModel::empirical(std::vector<double> maxima, std::vector<double> minima) {
  check_finite(maxima);
  check_finite(minima);
  TailModel t;
  t.backend_ = Backend::Empirical;
  std::sort(maxima.begin(), maxima.end());
  std::sort(minima.begin(), minima.end());
  t.maxima_ = std::move(maxima);
  t.minima_ = std::move(minima);
  return t;
}

TailModel TailModel::rayleigh(double scale_up, double scale_down) {
  if (!(scale_up > 0.0) || !(scale_down > 0.0) || !std::isfinite(scale_up) || !std::isfinite(scale_down)) {
    throw DomainError("Rayleigh tail scales must be positive and finite");
  }
  TailModel t;
  t.backend_ = Backend::Rayleigh;
  t.scale_up_ = scale_up;
  t.scale_down_ = scale_down;
  return t;
}

double TailModel::upper(double v) const {
  if (v <= 0.0) return 1.0;
  if (backend_ == Backend::Rayleigh) {
    const double z = v / scale_up_;
    return std::exp(-0.5 * z * z);
  }
  if (maxima_.empty()) return 0.0;
  const auto above = maxima_.end() - std::upper_bound(maxima_.begin(), maxima_.end(), v);
  return static_cast<double>(above) / static_cast<double>(maxima_.size());
}

double TailModel::lower(double u) const {
  if (u >= 0.0) return 1.0;
  if (backend_ == Backend::Rayleigh) {
    const double z = u / scale_down_;
    return std::exp(-0.5 * z * z);
  }
  if (minima_.empty()) return 0.0;
  const auto below = std::lower_bound(minima_.begin(), minima_.end(), u) - minima_.begin();
  return static_cast<double>(below) / static_cast<double>(minima_.size());
}

double TailModel::upper_cutoff(double eps) const {
  if (backend_ == Backend::Rayleigh) return rayleigh_cutoff(scale_up_, eps);
  return maxima_.empty() ? 0.0 : std::max(0.0, maxima_.back());
}

double TailModel::lower_cutoff(double eps) const {
  if (backend_ == Backend::Rayleigh) return rayleigh_cutoff(scale_down_, eps);
  return minima_.empty() ? 0.0 : std::max(0.0, -minima_.front());
}

Extremes split_extremes(std::span<const double> reduced) {
  check_finite(reduced);
  Extremes e;
  for (const double x : reduced) {
    if (x > 0.0) {
      e.maxima.push_back(x);
    } else if (x < 0.0) {
      e.minima.push_back(x);
    }
  }
  return e;
}

TailModel empirical_tails(std::span<const double> reduced) {
  auto e = split_extremes(reduced);
  return TailModel::empirical(std::move(e.maxima), std::move(e.minima));
}

TailModel fit_rayleigh_tails(std::span<const double> reduced) {
  auto e = split_extremes(reduced);
  if (e.maxima.size() < kMinRayleighExtremes || e.minima.size() < kMinRayleighExtremes) {
    auto t = TailModel::empirical(std::move(e.maxima), std::move(e.minima));
    t.set_fallback(true);
    return t;
  }
  const auto scale = [](const std::vector<double>& xs) {
    double s2 = 0.0;
    for (const double x : xs) s2 += x * x;
    return std::sqrt(s2 / static_cast<double>(xs.size()) / 2.0);
  };
  return TailModel::rayleigh(scale(e.maxima), scale(e.minima));
}

TurnChain turn_chain_from_q(const TransitionMatrix& q) {
  if (q.size() != 3) throw DomainError("turn_chain_from_q requires the three-state RT/SF/LT labeling");
  if (!(q(kSF, kSF) < 1.0) || !(q(kLT, kLT) < 1.0) || !(q(kRT, kRT) < 1.0)) {
    throw DomainError("turn chain is degenerate: a driving state is absorbing");
  }
  const double leave_sf = 1.0 - q(kSF, kSF);
  const double p_ll = q(kLT, kSF) * q(kSF, kLT) / (leave_sf * (1.0 - q(kLT, kLT)));
  const double p_rr = q(kRT, kSF) * q(kSF, kRT) / (leave_sf * (1.0 - q(kRT, kRT)));
  Matrix p(2, 2);
  p(kTurnLT, kTurnLT) = p_ll;
  p(kTurnLT, kTurnRT) = 1.0 - p_ll;
  p(kTurnRT, kTurnRT) = p_rr;
  p(kTurnRT, kTurnLT) = 1.0 - p_rr;
  TurnChain chain{TransitionMatrix(std::move(p)), {}};
  chain.pi = stationary_distribution(chain.p).pi;
  return chain;
}

double turn_chain_lt_rt_paths(const TransitionMatrix& q) {
  if (q.size() != 3) throw DomainError("turn_chain_lt_rt_paths requires three states");
  return (q(kLT, kSF) * q(kSF, kRT) / (1.0 - q(kSF, kSF)) + q(kLT, kRT)) / (1.0 - q(kLT, kLT));
}

HittingProbabilities solve_p2(const TurnChain& chain, const TailModel& tails, double u, double v) {
  if (!(u <= 0.0 && v >= 0.0)) throw DomainError("solve_p2 requires u <= 0 <= v");
  const double a = tails.upper(v);
  const double b = 1.0 - a;
  const double c = 1.0 - tails.lower(u);
  const auto& p = chain.p;
  // [1 - b p11, -c p12; -b p21, 1 - c p22] (p1, p2) = a (p11, p21)
  const double a11 = 1.0 - b * p(kTurnLT, kTurnLT);
  const double a12 = -c * p(kTurnLT, kTurnRT);
  const double a21 = -b * p(kTurnRT, kTurnLT);
  const double a22 = 1.0 - c * p(kTurnRT, kTurnRT);
  const double r1 = a * p(kTurnLT, kTurnLT);
  const double r2 = a * p(kTurnRT, kTurnLT);
  const double det = a11 * a22 - a12 * a21;
  HittingProbabilities h;
  if (std::abs(det) < 1e-14) {
    h.singular = true;
    return h;
  }
  h.p1 = std::clamp((r1 * a22 - a12 * r2) / det, 0.0, 1.0);
  h.p2 = std::clamp((a11 * r2 - a21 * r1) / det, 0.0, 1.0);
  return h;
}

double osc_intensity(const TurnChain& chain, const TailModel& tails, double u, double v) {
  if (!(u <= v)) throw DomainError("osc_intensity requires u <= v");
  const double pi_lt = chain.pi[kTurnLT];
  const double pi_rt = chain.pi[kTurnRT];
  if (v < 0.0) return 0.5 * pi_rt * tails.lower(u);
  if (u > 0.0) return 0.5 * pi_lt * tails.upper(v);
  return 0.5 * pi_rt * tails.lower(u) * solve_p2(chain, tails, u, v).p2;
}

DamageIntensity damage_intensity(const TurnChain& chain, const TailModel& tails, const DamageParams& params,
                                 const QuadratureConfig& config) {
  params.validate();
  if (config.nodes == 0) throw DomainError("quadrature needs at least one node per axis");
  const double beta = params.beta;
  const std::size_t n = config.nodes;
  const double big_u = tails.lower_cutoff(config.tail_cutoff);
  const double big_v = tails.upper_cutoff(config.tail_cutoff);
  const double hu = big_u / static_cast<double>(n);
  const double hv = big_v / static_cast<double>(n);
  const double ds = 1.0 / static_cast<double>(n);
  const double pi_lt = chain.pi[kTurnLT];
  const double pi_rt = chain.pi[kTurnRT];

  std::vector<double> u_nodes(n), lower_at(n), v_nodes(n), upper_at(n), s_nodes(n);
  for (std::size_t a = 0; a < n; ++a) {
    const double mid = (static_cast<double>(a) + 0.5);
    u_nodes[a] = -big_u + mid * hu;
    lower_at[a] = tails.lower(u_nodes[a]);
    v_nodes[a] = mid * hv;
    upper_at[a] = tails.upper(v_nodes[a]);
    s_nodes[a] = mid * ds;
  }

  DamageIntensity out;
  double sum = 0.0;
  // u < v < 0 with v = u(1 - s).
  if (big_u > 0.0) {
    double region = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
      const double w = -u_nodes[a];
      double inner = 0.0;
      for (std::size_t b = 0; b < n; ++b) inner += std::pow(s_nodes[b] * w, beta - 2.0);
      region += 0.5 * pi_rt * lower_at[a] * w * inner;
    }
    sum += region * hu * ds;
  }
  // u <= 0 <= v.
  if (big_u > 0.0 && big_v > 0.0) {
    double region = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
      if (lower_at[a] == 0.0) continue;
      for (std::size_t b = 0; b < n; ++b) {
        const auto hp = solve_p2(chain, tails, u_nodes[a], v_nodes[b]);
        if (hp.singular) ++out.singular_nodes;
        region += std::pow(v_nodes[b] - u_nodes[a], beta - 2.0) * 0.5 * pi_rt * lower_at[a] * hp.p2;
      }
    }
    sum += region * hu * hv;
  }
  // 0 < u < v with u = s v.
  if (big_v > 0.0) {
    double region = 0.0;
    for (std::size_t b = 0; b < n; ++b) {
      const double v = v_nodes[b];
      double inner = 0.0;
      for (std::size_t a = 0; a < n; ++a) inner += std::pow((1.0 - s_nodes[a]) * v, beta - 2.0);
      region += 0.5 * pi_lt * upper_at[b] * v * inner;
    }
    sum += region * hv * ds;
  }

  const double scale = params.alpha * beta * (beta - 1.0);
  out.per_step = scale * sum;
  out.per_turn = 2.0 * out.per_step;
  // Contribution beyond the cutoffs, bounded by the tail value there.
  out.remainder = params.alpha * beta * 0.5 *
                  (pi_rt * tails.lower(-big_u) * std::pow(big_u, beta) + pi_lt * tails.upper(big_v) * std::pow(big_v, beta));
  out.remainder *= 2.0;
  out.diverged = !std::isfinite(out.per_turn) ||
                 (out.remainder > 0.0 && out.remainder > config.divergence_ratio * out.per_turn);
  return out;
}

FrameDamage frame_damage(std::span<const double> eta, std::span<const double> d, double eta_start) {
  if (eta.size() != d.size()) throw InputError("frame_damage: eta and d must have the same length");
  FrameDamage f;
  f.delta_eta.resize(eta.size());
  f.delta_damage.resize(eta.size());
  f.cumulative.resize(eta.size());
  double prev = eta_start;
  double acc = 0.0;
  for (std::size_t k = 0; k < eta.size(); ++k) {
    if (!std::isfinite(eta[k]) || !std::isfinite(d[k])) throw InputError("frame_damage: non-finite input");
    if (eta[k] < prev) throw InputError("frame_damage: eta decreases at frame " + std::to_string(k));
    f.delta_eta[k] = eta[k] - prev;
    f.delta_damage[k] = f.delta_eta[k] * d[k];
    acc += f.delta_damage[k];
    f.cumulative[k] = acc;
    prev = eta[k];
  }
  f.total = acc;
  return f;
}

}  // namespace ohmm
