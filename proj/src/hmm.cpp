#include "ohmm/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ohmm/errors.hpp"

namespace ohmm {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_sizes(std::size_t m, std::span<const double> pi, const EmissionModel& em) {
  if (em.size() != m) throw DomainError("emission model and transition matrix disagree on the state count");
  if (pi.size() != m) throw DomainError("initial distribution has the wrong length");
}

}  // namespace

const char* state_name(std::size_t state) {
  switch (state) {
    case kRT:
      return "RT";
    case kSF:
      return "SF";
    case kLT:
      return "LT";
    default:
      return "?";
  }
}

EmissionModel::EmissionModel(std::vector<GalParams> states) {
  if (states.empty()) throw DomainError("emission model needs at least one state");
  densities_.reserve(states.size());
  for (const auto& p : states) densities_.emplace_back(p);
}

std::vector<GalParams> EmissionModel::states() const {
  std::vector<GalParams> out;
  out.reserve(densities_.size());
  for (const auto& d : densities_) out.push_back(d.params());
  return out;
}

std::size_t EmissionModel::log_densities(double y, std::span<double> out) const {
  std::size_t floored = 0;
  for (std::size_t i = 0; i < densities_.size(); ++i) {
    double v = densities_[i].log_density(y);
    if (v == kInf) {
      // y sits exactly on a singular center; use the density one resolution
      // step away so that likelihoods stay finite.
      const double delta = densities_[i].params().delta;
      const double step = std::max(std::nextafter(delta, kInf) - delta, kCenterResolution);
      v = densities_[i].log_density(delta + step);
    }
    if (!(v >= kLogDensityFloor)) {
      v = kLogDensityFloor;
      ++floored;
    }
    out[i] = v;
  }
  return floored;
}

bool correct_into(std::span<const double> prediction, std::span<const double> log_density, std::span<double> out) {
  const std::size_t m = prediction.size();
  // Singular (infinite) densities dominate every finite one.
  bool any_infinite = false;
  for (std::size_t k = 0; k < m; ++k) {
    if (prediction[k] > 0.0 && log_density[k] == kInf) any_infinite = true;
  }
  double top = -kInf;
  for (std::size_t k = 0; k < m; ++k) {
    double w;
    if (!(prediction[k] > 0.0)) {
      w = -kInf;
    } else if (any_infinite) {
      w = log_density[k] == kInf ? std::log(prediction[k]) : -kInf;
    } else {
      w = std::log(prediction[k]) + log_density[k];
    }
    out[k] = w;
    top = std::max(top, w);
  }
  if (!std::isfinite(top)) {
    std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(m));
    return false;
  }
  double total = 0.0;
  for (auto& v : out) {
    v = std::exp(v - top);
    total += v;
  }
  for (auto& v : out) v /= total;
  return true;
}

void predict_into(std::span<const double> phi, const TransitionMatrix& q, std::span<double> prediction) {
  const std::size_t m = q.size();
  std::fill(prediction.begin(), prediction.end(), 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    const double w = phi[j];
    if (w == 0.0) continue;
    const auto row = q.row(j);
    for (std::size_t k = 0; k < m; ++k) prediction[k] += w * row[k];
  }
}

bool retrospective_kernel_into(std::span<const double> phi, const TransitionMatrix& q,
                               std::span<const double> prediction, std::span<double> r) {
  const std::size_t m = q.size();
  bool any_unreachable = false;
  for (std::size_t k = 0; k < m; ++k) {
    if (prediction[k] > 0.0) {
      for (std::size_t kp = 0; kp < m; ++kp) r[kp * m + k] = phi[kp] * q(kp, k) / prediction[k];
    } else {
      any_unreachable = true;
      for (std::size_t kp = 0; kp < m; ++kp) r[kp * m + k] = 1.0 / static_cast<double>(m);
    }
  }
  return any_unreachable;
}

FilterDistribution filter_init_log(std::span<const double> pi, std::span<const double> log_density) {
  if (pi.size() != log_density.size()) throw DomainError("filter_init: size mismatch");
  validate_probability_vector(pi, 1e-9, "initial distribution");
  FilterDistribution f;
  f.phi.resize(pi.size());
  f.degenerate = !correct_into(pi, log_density, f.phi);
  f.t = 0;
  return f;
}

FilterDistribution filter_init(std::span<const double> pi, const EmissionModel& em, double y0) {
  std::vector<double> logg(em.size());
  em.log_densities(y0, logg);
  return filter_init_log(pi, logg);
}

FilterDistribution filter_step_log(const FilterDistribution& phi, const TransitionMatrix& q,
                                   std::span<const double> log_density) {
  const std::size_t m = q.size();
  if (phi.phi.size() != m || log_density.size() != m) throw DomainError("filter_step: size mismatch");
  std::vector<double> pred(m);
  predict_into(phi.phi, q, pred);
  FilterDistribution out;
  out.phi.resize(m);
  out.degenerate = !correct_into(pred, log_density, out.phi);
  out.t = phi.t + 1;
  return out;
}

FilterDistribution filter_step(const FilterDistribution& phi, const TransitionMatrix& q, const EmissionModel& em,
                               double y_next) {
  std::vector<double> logg(em.size());
  em.log_densities(y_next, logg);
  return filter_step_log(phi, q, logg);
}

RetrospectiveKernel retrospective_kernel(std::span<const double> phi, const TransitionMatrix& q) {
  const std::size_t m = q.size();
  if (phi.size() != m) throw DomainError("retrospective_kernel: size mismatch");
  std::vector<double> pred(m);
  predict_into(phi, q, pred);
  RetrospectiveKernel out{Matrix(m, m), std::vector<bool>(m, false)};
  retrospective_kernel_into(phi, q, pred, out.r.data());
  for (std::size_t k = 0; k < m; ++k) out.unreachable[k] = !(pred[k] > 0.0);
  return out;
}

namespace {

struct EStepResult {
  SufficientStats stats;
  double loglik;
  std::size_t floored;
};

double log_normalizer(std::span<const double> prediction, std::span<const double> log_density) {
  double top = -kInf;
  for (std::size_t k = 0; k < prediction.size(); ++k) {
    if (prediction[k] > 0.0) top = std::max(top, std::log(prediction[k]) + log_density[k]);
  }
  if (!std::isfinite(top)) return top;
  double total = 0.0;
  for (std::size_t k = 0; k < prediction.size(); ++k) {
    if (prediction[k] > 0.0) total += std::exp(std::log(prediction[k]) + log_density[k] - top);
  }
  return top + std::log(total);
}

EStepResult run_estep(std::span<const double> y, const TransitionMatrix& q, const EmissionModel& em,
                      std::span<const double> pi, bool want_stats) {
  if (y.empty()) throw InputError("empty observation sequence");
  const std::size_t m = q.size();
  check_sizes(m, pi, em);
  validate_probability_vector(pi, 1e-9, "initial distribution");

  EStepResult res{{Tensor3(m), Matrix(m, m)}, 0.0, 0};
  std::vector<double> logg(m), phi(m), pred(m), r(m * m);
  Tensor3 next(m);

  res.floored += em.log_densities(y[0], logg);
  res.loglik = log_normalizer(pi, logg);
  correct_into(pi, logg, phi);

  Tensor3& rho = res.stats.rho;
  for (std::size_t t = 1; t < y.size(); ++t) {
    predict_into(phi, q, pred);
    if (want_stats) retrospective_kernel_into(phi, q, pred, r);
    res.floored += em.log_densities(y[t], logg);
    res.loglik += log_normalizer(pred, logg);
    correct_into(pred, logg, phi);
    if (!want_stats) continue;
    const double gamma = 1.0 / static_cast<double>(t);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t k = 0; k < m; ++k) {
          double carry = 0.0;
          for (std::size_t kp = 0; kp < m; ++kp) carry += rho(i, j, kp) * r[kp * m + k];
          next(i, j, k) = (j == k ? gamma * r[i * m + j] : 0.0) + (1.0 - gamma) * carry;
        }
      }
    }
    std::swap(rho, next);
  }
  if (want_stats) {
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < m; ++k) s += phi[k] * rho(i, j, k);
        res.stats.s(i, j) = s;
      }
    }
  }
  return res;
}

}  // namespace

LogLikelihood loglik(std::span<const double> y, const TransitionMatrix& q, const EmissionModel& em,
                     std::span<const double> pi) {
  const auto res = run_estep(y, q, em, pi, false);
  return {res.loglik, res.floored};
}

SufficientStats expected_transition_stats(std::span<const double> y, const TransitionMatrix& q,
                                          const EmissionModel& em, std::span<const double> pi) {
  return run_estep(y, q, em, pi, true).stats;
}

std::vector<EmIterate> batch_em(std::span<const double> y, const TransitionMatrix& q_init, const EmissionModel& em,
                                std::span<const double> pi, int n_iters) {
  if (n_iters < 1) throw DomainError("batch_em: n_iters must be >= 1");
  const std::size_t m = q_init.size();
  std::vector<EmIterate> out;
  out.reserve(static_cast<std::size_t>(n_iters) + 1);
  TransitionMatrix q = q_init;
  std::vector<bool> unvisited(m, false);
  for (int it = 0; it < n_iters; ++it) {
    const auto res = run_estep(y, q, em, pi, true);
    out.push_back({q, res.loglik, unvisited});
    Matrix next(m, m);
    std::fill(unvisited.begin(), unvisited.end(), false);
    for (std::size_t i = 0; i < m; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < m; ++j) row += res.stats.s(i, j);
      if (row > 0.0) {
        for (std::size_t j = 0; j < m; ++j) next(i, j) = res.stats.s(i, j) / row;
      } else {
        unvisited[i] = true;
        for (std::size_t j = 0; j < m; ++j) next(i, j) = q(i, j);
      }
    }
    q = TransitionMatrix(std::move(next));
  }
  out.push_back({q, loglik(y, q, em, pi).value, unvisited});
  return out;
}

std::vector<std::size_t> viterbi(std::span<const double> y, const TransitionMatrix& q, const EmissionModel& em,
                                 std::span<const double> pi) {
  if (y.empty()) throw InputError("viterbi: empty observation sequence");
  const std::size_t m = q.size();
  check_sizes(m, pi, em);
  const std::size_t n = y.size();

  Matrix logq(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) logq(i, j) = q(i, j) > 0.0 ? std::log(q(i, j)) : -kInf;
  }
  std::vector<std::uint32_t> back(n * m, 0);
  std::vector<double> score(m), next(m), logg(m);
  em.log_densities(y[0], logg);
  for (std::size_t k = 0; k < m; ++k) score[k] = (pi[k] > 0.0 ? std::log(pi[k]) : -kInf) + logg[k];

  for (std::size_t t = 1; t < n; ++t) {
    em.log_densities(y[t], logg);
    for (std::size_t k = 0; k < m; ++k) {
      double best = -kInf;
      std::uint32_t arg = 0;
      for (std::size_t j = 0; j < m; ++j) {
        const double v = score[j] + logq(j, k);
        if (v > best) {
          best = v;
          arg = static_cast<std::uint32_t>(j);
        }
      }
      next[k] = best + logg[k];
      back[t * m + k] = arg;
    }
    std::swap(score, next);
  }
  std::vector<std::size_t> path(n);
  std::size_t last = 0;
  for (std::size_t k = 1; k < m; ++k) {
    if (score[k] > score[last]) last = k;
  }
  path[n - 1] = last;
  for (std::size_t t = n - 1; t > 0; --t) path[t - 1] = back[t * m + path[t]];
  return path;
}

double path_log_probability(std::span<const std::size_t> path, std::span<const double> y,
                            const TransitionMatrix& q, const EmissionModel& em, std::span<const double> pi) {
  if (path.size() != y.size() || path.empty()) throw InputError("path_log_probability: length mismatch");
  std::vector<double> logg(em.size());
  em.log_densities(y[0], logg);
  double lp = std::log(pi[path[0]]) + logg[path[0]];
  for (std::size_t t = 1; t < y.size(); ++t) {
    em.log_densities(y[t], logg);
    lp += std::log(q(path[t - 1], path[t])) + logg[path[t]];
  }
  return lp;
}

}  // namespace ohmm
