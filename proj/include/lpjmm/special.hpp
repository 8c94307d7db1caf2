#pragma once

namespace lpjmm {

// Standard normal CDF.
double normal_cdf(double x);

// Log of the standard normal density.
double log_normal_pdf(double x);

// Log of the standard normal CDF, finite for all finite x. The upper tail
// uses log1p, the deep lower tail switches to the Mills-ratio continued
// fraction so that values like logPhi(-40) stay accurate instead of
// underflowing to -inf. Throws std::invalid_argument on non-finite input.
// log(1 - Phi(x)) is available as log_normal_cdf(-x).
double log_normal_cdf(double x);

// Mills ratio (1 - Phi(t)) / phi(t) for t >= 8, via the tail continued
// fraction 1/(t + 1/(t + 2/(t + 3/(...)))).
double mills_ratio_tail(double t);

}  // namespace lpjmm
