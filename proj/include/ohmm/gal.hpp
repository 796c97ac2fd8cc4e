#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ohmm/rng.hpp"

namespace ohmm {

/// Univariate generalized asymmetric Laplace parameters.
///
/// Y = delta + G*mu + sqrt(G)*sigma*Z with G ~ Gamma(shape 1/nu, scale 1) and
/// Z standard normal, so E[Y] = delta + mu/nu and Var[Y] = (sigma^2 + mu^2)/nu.
struct GalParams {
  double delta = 0.0;  ///< location
  double mu = 0.0;     ///< shift (asymmetry)
  double nu = 1.0;     ///< shape, > 0
  double sigma = 1.0;  ///< scale, > 0

  /// Throws DomainError unless nu > 0 and sigma > 0 and all fields finite.
  void validate() const;

  double mean() const { return delta + mu / nu; }
  double variance() const { return (sigma * sigma + mu * mu) / nu; }

  friend bool operator==(const GalParams&, const GalParams&) = default;
};

/// Log-density evaluator with the parameter-only terms precomputed.
class GalDensity {
 public:
  explicit GalDensity(const GalParams& params);

  double log_density(double y) const;
  const GalParams& params() const { return params_; }

 private:
  GalParams params_;
  double drift_;          // mu / sigma^2
  double order_;          // 1/nu - 1/2
  double c2_over_sigma_;  // sqrt(2 + mu^2/sigma^2) / sigma
  double log_norm_;
  double log_at_center_;
};

/// Log-density. At y == delta the density is finite only when 1/nu > 1/2;
/// otherwise +infinity is returned (the limit of the mixture integral).
double gal_logpdf(const GalParams& params, double y);

double gal_pdf(const GalParams& params, double y);

/// Sum of log-densities over samples.
double gal_loglik(const GalParams& params, std::span<const double> samples);

/// One draw from the normal mean-variance mixture.
double gal_draw(const GalParams& params, Rng& rng);

/// n i.i.d. draws.
std::vector<double> gal_sample(const GalParams& params, Rng& rng, std::size_t n);

struct GalFitOptions {
  int max_evaluations = 500;
  double step_tolerance = 1e-7;
};

struct GalFit {
  GalParams params;
  double loglik = 0.0;
  double init_loglik = 0.0;
  int evaluations = 0;
  bool converged = false;
  bool small_sample = false;  ///< fewer than 100 samples
};

/// Maximum-likelihood fit by compass (coordinate pattern) search over
/// (delta, mu, log nu, log sigma). Never returns a point with lower
/// log-likelihood than `init`. Throws InputError on non-finite or empty input.
GalFit gal_fit_mle(std::span<const double> samples, const GalParams& init,
                   const GalFitOptions& options = {});

/// Moment-based starting point for gal_fit_mle.
GalParams gal_initial_guess(std::span<const double> samples);

}  // namespace ohmm
