#include "ohmm/bessel.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "ohmm/errors.hpp"

namespace ohmm {
namespace {

constexpr double kEps = 1e-16;
constexpr int kMaxIter = 10000;
constexpr double kSeriesLimit = 2.0;
// Below this the leading small-argument terms are exact to double precision,
// while the series would overflow.
constexpr double kTinyArgument = 1e-150;

// Taylor coefficients of 1/Gamma(z) = sum_{k>=1} c_k z^k.
constexpr std::array<double, 26> kRecipGamma = {
    1.0,
    0.5772156649015329,
    -0.6558780715202538,
    -0.0420026350340952,
    0.1665386113822915,
    -0.0421977345555443,
    -0.0096219715278770,
    0.0072189432466630,
    -0.0011651675918591,
    -0.0002152416741149,
    0.0001280502823882,
    -0.0000201348547807,
    -0.0000012504934821,
    0.0000011330272320,
    -0.0000002056338417,
    0.0000000061160950,
    0.0000000050020075,
    -0.0000000011812746,
    0.0000000001043427,
    0.0000000000077823,
    -0.0000000000036968,
    0.0000000000005100,
    -0.0000000000000206,
    -0.0000000000000054,
    0.0000000000000014,
    0.0000000000000001,
};

struct TemmeGammas {
  double gam1;   // (1/G(1-mu) - 1/G(1+mu)) / (2 mu)
  double gam2;   // (1/G(1-mu) + 1/G(1+mu)) / 2
  double gampl;  // 1/G(1+mu)
  double gammi;  // 1/G(1-mu)
};

TemmeGammas temme_gammas(double mu) {
  const double mu2 = mu * mu;
  double even = 0.0;
  double odd = 0.0;
  // Horner over mu^2 from the highest coefficient down.
  for (int k = 25; k >= 0; --k) {
    // coefficient index k corresponds to c_{k+1}
    if ((k + 1) % 2 == 0) {
      even = even * mu2 + kRecipGamma[static_cast<std::size_t>(k)];
    } else {
      odd = odd * mu2 + kRecipGamma[static_cast<std::size_t>(k)];
    }
  }
  TemmeGammas g{};
  g.gam1 = -even;
  g.gam2 = odd;
  g.gampl = g.gam2 - mu * g.gam1;
  g.gammi = g.gam2 + mu * g.gam1;
  return g;
}

// K_mu(x) and K_{mu+1}(x) for |mu| <= 1/2, as mantissas times exp(log_scale).
struct KPair {
  double k_mu;
  double k_mu1;
  double log_scale;
};

KPair temme_series(double mu, double x) {
  const double x2 = 0.5 * x;
  const double pimu = std::numbers::pi * mu;
  const double fact = std::abs(pimu) < kEps ? 1.0 : pimu / std::sin(pimu);
  double d = -std::log(x2);
  double e = mu * d;
  const double fact2 = std::abs(e) < kEps ? 1.0 : std::sinh(e) / e;
  const TemmeGammas g = temme_gammas(mu);
  double ff = fact * (g.gam1 * std::cosh(e) + g.gam2 * fact2 * d);
  double sum = ff;
  e = std::exp(e);
  double p = 0.5 * e / g.gampl;
  double q = 0.5 / (e * g.gammi);
  double c = 1.0;
  d = x2 * x2;
  double sum1 = p;
  const double mu2 = mu * mu;
  for (int i = 1; i <= kMaxIter; ++i) {
    const double di = static_cast<double>(i);
    ff = (di * ff + p + q) / (di * di - mu2);
    c *= d / di;
    p /= di - mu;
    q /= di + mu;
    const double del = c * ff;
    sum += del;
    const double del1 = c * (p - di * ff);
    sum1 += del1;
    if (std::abs(del) < std::abs(sum) * kEps && std::abs(del1) < std::abs(sum1) * kEps) break;
  }
  return {sum, sum1 * 2.0 / x, 0.0};
}

KPair steed_cf2(double mu, double x) {
  double b = 2.0 * (1.0 + x);
  double d = 1.0 / b;
  double delh = d;
  double h = d;
  double q1 = 0.0;
  double q2 = 1.0;
  const double a1 = 0.25 - mu * mu;
  double q = a1;
  double c = a1;
  double a = -a1;
  double s = 1.0 + q * delh;
  for (int i = 2; i <= kMaxIter; ++i) {
    const double di = static_cast<double>(i);
    a -= 2.0 * (di - 1.0);
    c = -a * c / di;
    const double qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const double dels = q * delh;
    s += dels;
    if (std::abs(dels / s) < kEps) break;
  }
  h *= a1;
  const double k_mu = std::sqrt(std::numbers::pi / (2.0 * x)) / s;
  const double k_mu1 = k_mu * (mu + x + 0.5 - h) / x;
  return {k_mu, k_mu1, -x};
}

// K_nu(x) ~ (Gamma(nu) (x/2)^-nu + Gamma(-nu) (x/2)^nu) / 2 for 0 < nu < 1,
// the first term alone for nu >= 1, and -log(x/2) - Euler gamma for nu = 0.
std::pair<double, double> bessel_k_tiny(double nu, double x) {
  const double log_half_x = std::log(x) - std::numbers::ln2;
  if (nu < 1e-12) return {-log_half_x - std::numbers::egamma, 0.0};
  double log_k = std::lgamma(nu) - std::numbers::ln2 - nu * log_half_x;
  if (nu < 1.0) {
    // Gamma(-nu) / Gamma(nu) = -Gamma(1 - nu) / Gamma(1 + nu)
    log_k += std::log(-std::expm1(std::lgamma(1.0 - nu) - std::lgamma(1.0 + nu) + 2.0 * nu * log_half_x));
  }
  return {1.0, log_k};
}

// Returns mantissa and log scale of K_order(x).
std::pair<double, double> bessel_k_scaled(double order, double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError("bessel_k: argument must be positive and finite, got " + std::to_string(x));
  }
  if (!std::isfinite(order)) throw DomainError("bessel_k: order must be finite");
  const double nu = std::abs(order);
  if (x < kTinyArgument) return bessel_k_tiny(nu, x);
  const int n = static_cast<int>(nu + 0.5);
  const double mu = nu - n;
  KPair kp = x < kSeriesLimit ? temme_series(mu, x) : steed_cf2(mu, x);
  // One recurrence step multiplies by at most 2 nu / x < 1e152 here.
  constexpr double kBig = 1e100;
  double k_prev = kp.k_mu;
  double k_cur = kp.k_mu1;
  if (n == 0) return {k_prev, kp.log_scale};
  for (int i = 1; i < n; ++i) {
    if (k_cur > kBig) {
      k_prev /= k_cur;
      kp.log_scale += std::log(k_cur);
      k_cur = 1.0;
    }
    const double k_next = 2.0 * (mu + i) / x * k_cur + k_prev;
    k_prev = k_cur;
    k_cur = k_next;
  }
  return {k_cur, kp.log_scale};
}

}  // namespace

double bessel_k(double order, double x) {
  const auto [mantissa, log_scale] = bessel_k_scaled(order, x);
  return mantissa * std::exp(log_scale);
}

double log_bessel_k(double order, double x) {
  const auto [mantissa, log_scale] = bessel_k_scaled(order, x);
  return std::log(mantissa) + log_scale;
}

}  // namespace ohmm
