#pragma once

#include "lgp/rng.hpp"

namespace lgp {

double normal_pdf(double x);

/// Standard normal CDF via erfc (accurate in both tails).
double normal_cdf(double x);

/// Inverse standard normal CDF, Wichura's AS 241 (PPND16), p in (0, 1).
double normal_quantile(double p);

/// One exact draw from N(mu, sigma^2) restricted to (lower, upper).
/// Either bound may be infinite. Inverse-CDF in the bulk; shifted-exponential
/// rejection once the live region is beyond ~5 sigma, so far-tail draws stay
/// finite and exact.
double sample_truncnorm(double mu, double sigma, double lower, double upper,
                        Rng& rng);

}  // namespace lgp
