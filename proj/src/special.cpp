#include "lpjmm/special.hpp"

#include <cmath>
#include <stdexcept>

namespace lpjmm {

namespace {
constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kLogSqrt2Pi = 0.9189385332046727418;
}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double log_normal_pdf(double x) { return -0.5 * x * x - kLogSqrt2Pi; }

double mills_ratio_tail(double t) {
  // Backward recurrence; depth 64 is converged to machine precision for t >= 8.
  double r = 0.0;
  for (int k = 64; k >= 1; --k) r = k / (t + r);
  return 1.0 / (t + r);
}

double log_normal_cdf(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("log_normal_cdf: non-finite input");
  if (x >= 0.0) return std::log1p(-0.5 * std::erfc(x * kInvSqrt2));
  if (x > -8.0) return std::log(0.5 * std::erfc(-x * kInvSqrt2));
  return log_normal_pdf(x) + std::log(mills_ratio_tail(-x));
}

}  // namespace lpjmm
