#pragma once

namespace ohmm {

/// Modified Bessel function of the second kind K_order(x), x > 0.
///
/// Temme's series for x < 2 and Steed's continued fraction (CF2) for x >= 2
/// give K_mu and K_{mu+1} for |mu| <= 1/2; the requested order is reached by
/// forward recurrence, which is stable for K. Throws DomainError for x <= 0.
double bessel_k(double order, double x);

/// log K_order(x). Safe where K itself would overflow or underflow (large
/// orders at small x, large x).
double log_bessel_k(double order, double x);

}  // namespace ohmm
