#pragma once

namespace histoband {

/// Standard normal density.
double normal_pdf(double x);

/// Standard normal CDF, Phi(x) = erfc(-x/sqrt(2))/2.
double normal_cdf(double x);

/// Upper tail probability, 1 - Phi(x), computed without cancellation.
double normal_sf(double x);

/// x with normal_sf(x) == tail, for tail in (0,1). Solved by a bracketed
/// Newton iteration on erfc, accurate to a few ulp.
double normal_upper_quantile(double tail);

/// Phi^{-1}(p) for p in (0,1).
double normal_quantile(double p);

}  // namespace histoband
