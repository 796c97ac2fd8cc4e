#include "ohmm/gal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "ohmm/bessel.hpp"
#include "ohmm/errors.hpp"

namespace ohmm {

void GalParams::validate() const {
  if (!std::isfinite(delta) || !std::isfinite(mu) || !std::isfinite(nu) || !std::isfinite(sigma)) {
    throw DomainError("GAL parameters must be finite");
  }
  if (!(nu > 0.0)) throw DomainError("GAL shape nu must be > 0, got " + std::to_string(nu));
  if (!(sigma > 0.0)) throw DomainError("GAL scale sigma must be > 0, got " + std::to_string(sigma));
}

GalDensity::GalDensity(const GalParams& p) : params_(p) {
  p.validate();
  const double tau = 1.0 / p.nu;
  const double c2 = std::sqrt(2.0 + (p.mu * p.mu) / (p.sigma * p.sigma));
  drift_ = p.mu / (p.sigma * p.sigma);
  order_ = tau - 0.5;
  c2_over_sigma_ = c2 / p.sigma;
  const double base =
      std::numbers::ln2 - 0.5 * std::log(2.0 * std::numbers::pi) - std::log(p.sigma) - std::lgamma(tau);
  log_norm_ = base - order_ * std::log(p.sigma * c2);
  if (order_ > 0.0) {
    // (|x|/(sigma c2))^lambda K_lambda(|x| c2/sigma) -> Gamma(lambda) 2^(lambda-1) / c2^(2 lambda)
    log_at_center_ = base + std::lgamma(order_) + (order_ - 1.0) * std::numbers::ln2 - 2.0 * order_ * std::log(c2);
  } else {
    log_at_center_ = std::numeric_limits<double>::infinity();
  }
}

double GalDensity::log_density(double y) const {
  const double x = y - params_.delta;
  if (x == 0.0) return log_at_center_;
  const double ax = std::abs(x);
  return log_norm_ + x * drift_ + order_ * std::log(ax) + log_bessel_k(order_, ax * c2_over_sigma_);
}

double gal_logpdf(const GalParams& params, double y) { return GalDensity(params).log_density(y); }

double gal_pdf(const GalParams& params, double y) { return std::exp(gal_logpdf(params, y)); }

double gal_loglik(const GalParams& params, std::span<const double> samples) {
  const GalDensity density(params);
  double total = 0.0;
  for (const double y : samples) total += density.log_density(y);
  return total;
}

double gal_draw(const GalParams& params, Rng& rng) {
  params.validate();
  const double g = rng.gamma(1.0 / params.nu);
  return params.delta + g * params.mu + std::sqrt(g) * params.sigma * rng.normal();
}

std::vector<double> gal_sample(const GalParams& params, Rng& rng, std::size_t n) {
  params.validate();
  std::vector<double> out(n);
  for (auto& v : out) v = gal_draw(params, rng);
  return out;
}

GalParams gal_initial_guess(std::span<const double> samples) {
  if (samples.empty()) throw InputError("gal_initial_guess: no samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  const double median = sorted[sorted.size() / 2];
  const double mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / n;
  double m2 = 0.0;
  double m4 = 0.0;
  for (const double v : sorted) {
    const double d = v - mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m4 /= n;
  const double var = std::max(m2, 1e-12);
  const double excess_kurtosis = m4 / (var * var) - 3.0;
  // symmetric variance-gamma has excess kurtosis 3 nu
  const double nu = std::clamp(excess_kurtosis / 3.0, 0.05, 20.0);
  const double mu = nu * (mean - median);
  const double sigma2 = std::max(nu * var - mu * mu, 0.01 * nu * var);
  return GalParams{median, mu, nu, std::sqrt(sigma2)};
}

GalFit gal_fit_mle(std::span<const double> samples, const GalParams& init, const GalFitOptions& options) {
  if (samples.empty()) throw InputError("gal_fit_mle: no samples");
  for (const double y : samples) {
    if (!std::isfinite(y)) throw InputError("gal_fit_mle: non-finite sample");
  }
  init.validate();

  using Point = std::array<double, 4>;  // delta, mu, log nu, log sigma
  const auto to_params = [](const Point& x) {
    return GalParams{x[0], x[1], std::exp(x[2]), std::exp(x[3])};
  };
  int evaluations = 0;
  const auto objective = [&](const Point& x) {
    ++evaluations;
    const GalParams p = to_params(x);
    if (!(p.nu > 0.0) || !(p.sigma > 0.0) || !std::isfinite(p.nu) || !std::isfinite(p.sigma)) {
      return -std::numeric_limits<double>::infinity();
    }
    const double ll = gal_loglik(p, samples);
    // An observation sitting exactly on delta with a singular density makes
    // the likelihood unbounded; such points are not admissible maxima.
    return std::isfinite(ll) ? ll : -std::numeric_limits<double>::infinity();
  };

  double spread = 0.0;
  {
    const double n = static_cast<double>(samples.size());
    const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
    for (const double y : samples) spread += (y - mean) * (y - mean);
    spread = std::sqrt(spread / n);
    if (!(spread > 0.0)) spread = 1.0;
  }

  Point x{init.delta, init.mu, std::log(init.nu), std::log(init.sigma)};
  Point step{0.05 * spread, 0.05 * spread, 0.2, 0.1};
  GalFit fit;
  fit.small_sample = samples.size() < 100;
  fit.init_loglik = gal_loglik(init, samples);
  double best = objective(x);

  bool converged = false;
  while (evaluations < options.max_evaluations) {
    bool any_move = false;
    for (std::size_t c = 0; c < x.size() && evaluations < options.max_evaluations; ++c) {
      Point trial = x;
      trial[c] = x[c] + step[c];
      double value = objective(trial);
      if (value > best) {
        x = trial;
        best = value;
        step[c] *= 1.5;
        any_move = true;
        continue;
      }
      if (evaluations >= options.max_evaluations) break;
      trial[c] = x[c] - step[c];
      value = objective(trial);
      if (value > best) {
        x = trial;
        best = value;
        step[c] *= -1.5;
        any_move = true;
        continue;
      }
      step[c] *= 0.5;
    }
    bool small = true;
    for (std::size_t c = 0; c < x.size(); ++c) {
      if (std::abs(step[c]) > options.step_tolerance * (1.0 + std::abs(x[c]))) small = false;
    }
    if (small && !any_move) {
      converged = true;
      break;
    }
  }

  // The initial point may itself have been the best (or non-finite).
  if (std::isfinite(fit.init_loglik) && !(best >= fit.init_loglik)) {
    fit.params = init;
    fit.loglik = fit.init_loglik;
  } else {
    fit.params = to_params(x);
    fit.loglik = best;
  }
  fit.evaluations = evaluations;
  fit.converged = converged;
  return fit;
}

}  // namespace ohmm
