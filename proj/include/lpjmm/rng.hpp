#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <sstream>
#include <string>

namespace lpjmm {

// Deterministic random source. All variate generators are built directly on
// the mt19937_64 stream (no stateful std distributions), so the engine state
// is the entire RNG state and checkpoints restore it exactly. Draws consumed
// per call: uniform 1, normal 2, everything else a rejection loop on these.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t raw() { return engine_(); }

  // Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  // Box-Muller without caching the second variate.
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  double exponential(double rate) { return -std::log(uniform()) / rate; }

  // Marsaglia-Tsang; shape < 1 boosted through the power trick.
  double gamma(double shape, double rate) {
    if (shape < 1.0) {
      const double u = uniform();
      return gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      const double x = normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      const double u = uniform();
      if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v / rate;
    }
  }

  double inv_gamma(double shape, double rate) { return 1.0 / gamma(shape, rate); }

  Eigen::VectorXd dirichlet(const Eigen::VectorXd& alpha) {
    Eigen::VectorXd w(alpha.size());
    for (Eigen::Index h = 0; h < alpha.size(); ++h) w[h] = gamma(alpha[h], 1.0);
    return w / w.sum();
  }

  // Index into log weights (unnormalized), 0-based.
  int categorical_from_log(std::span<const double> logw) {
    double mx = logw[0];
    for (double v : logw) mx = std::max(mx, v);
    double total = 0.0;
    for (double v : logw) total += std::exp(v - mx);
    double u = uniform() * total;
    double acc = 0.0;
    for (std::size_t h = 0; h + 1 < logw.size(); ++h) {
      acc += std::exp(logw[h] - mx);
      if (u < acc) return static_cast<int>(h);
    }
    return static_cast<int>(logw.size()) - 1;
  }

  // Standard normal conditioned on (t, inf). Robert's exponential proposal in
  // the tail keeps this exact and cheap out to very large t.
  double std_normal_above(double t) {
    if (t <= 0.0) {
      for (;;) {
        const double z = normal();
        if (z > t) return z;
      }
    }
    const double a = 0.5 * (t + std::sqrt(t * t + 4.0));
    for (;;) {
      const double z = t + exponential(a);
      const double diff = z - a;
      if (std::log(uniform()) <= -0.5 * diff * diff) return z;
    }
  }

  // N(mean, 1) restricted to (0, inf).
  double trunc_normal_positive(double mean) { return mean + std_normal_above(-mean); }

  // N(mean, 1) restricted to (-inf, 0].
  double trunc_normal_nonpositive(double mean) { return -trunc_normal_positive(-mean); }

  std::string state_string() const {
    std::ostringstream os;
    os << engine_;
    return os.str();
  }

  void set_state_string(const std::string& s) {
    std::istringstream is(s);
    is >> engine_;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace lpjmm
