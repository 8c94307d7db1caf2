#include <doctest.h>

#include <cmath>
#include <vector>

#include "lpjmm/rng.hpp"

using namespace lpjmm;

namespace {
struct Moments {
  double mean = 0, var = 0;
};
template <class F>
Moments sample_moments(int n, F&& draw) {
  double s = 0, ss = 0;
  for (int t = 0; t < n; ++t) {
    const double v = draw();
    s += v;
    ss += v * v;
  }
  const double mean = s / n;
  return {mean, ss / n - mean * mean};
}
}  // namespace

TEST_CASE("uniform stays inside the open interval") {
  Rng rng(7);
  for (int t = 0; t < 100000; ++t) {
    const double u = rng.uniform();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("normal moments") {
  Rng rng(11);
  const auto m = sample_moments(200000, [&] { return rng.normal(); });
  CHECK(m.mean == doctest::Approx(0.0).epsilon(0.02));
  CHECK(m.var == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("gamma moments") {
  Rng rng(13);
  const double shape = 2.5, rate = 1.7;
  const auto m = sample_moments(200000, [&] { return rng.gamma(shape, rate); });
  CHECK(m.mean == doctest::Approx(shape / rate).epsilon(0.02));
  CHECK(m.var == doctest::Approx(shape / (rate * rate)).epsilon(0.03));
  // shape below one goes through the boost path
  const auto m2 = sample_moments(200000, [&] { return rng.gamma(0.6, 2.0); });
  CHECK(m2.mean == doctest::Approx(0.3).epsilon(0.03));
}

TEST_CASE("dirichlet moments") {
  Rng rng(17);
  Eigen::VectorXd alpha(3);
  alpha << 1.0, 2.0, 3.0;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(3);
  const int n = 100000;
  for (int t = 0; t < n; ++t) mean += rng.dirichlet(alpha);
  mean /= n;
  CHECK(mean[0] == doctest::Approx(1.0 / 6.0).epsilon(0.02));
  CHECK(mean[1] == doctest::Approx(2.0 / 6.0).epsilon(0.02));
  CHECK(mean[2] == doctest::Approx(3.0 / 6.0).epsilon(0.02));
}

TEST_CASE("truncated normal honors signs and extreme means") {
  Rng rng(23);
  for (double mean : {-30.0, -5.0, 0.0, 5.0, 30.0}) {
    for (int t = 0; t < 2000; ++t) {
      CHECK(rng.trunc_normal_positive(mean) > 0.0);
      CHECK(rng.trunc_normal_nonpositive(mean) <= 0.0);
    }
  }
  // y = 1, eta = 20: draws concentrate near eta
  double mn = 1e9, mx = -1e9;
  for (int t = 0; t < 10000; ++t) {
    const double v = rng.trunc_normal_positive(20.0);
    mn = std::min(mn, v);
    mx = std::max(mx, v);
  }
  CHECK(mn > 14.0);
  CHECK(mx < 26.0);
}

TEST_CASE("half-normal moment of the augmentation draw") {
  // y = 0, eta = 0: mean of ystar is -sqrt(2/pi)
  Rng rng(29);
  double s = 0;
  const int n = 100000;
  for (int t = 0; t < n; ++t) s += rng.trunc_normal_nonpositive(0.0);
  CHECK(s / n == doctest::Approx(-0.7978845608028654).epsilon(0.015));
}

TEST_CASE("categorical from log weights") {
  Rng rng(31);
  std::vector<double> logw = {std::log(0.2), std::log(0.5), std::log(0.3)};
  std::vector<int> counts(3, 0);
  const int n = 100000;
  for (int t = 0; t < n; ++t) ++counts[rng.categorical_from_log(logw)];
  CHECK(counts[0] / double(n) == doctest::Approx(0.2).epsilon(0.05));
  CHECK(counts[1] / double(n) == doctest::Approx(0.5).epsilon(0.05));
  CHECK(counts[2] / double(n) == doctest::Approx(0.3).epsilon(0.05));
}

TEST_CASE("state round trip restores the stream") {
  Rng a(101);
  for (int t = 0; t < 123; ++t) a.normal();
  const std::string snap = a.state_string();
  std::vector<double> ahead;
  for (int t = 0; t < 50; ++t) ahead.push_back(a.uniform());
  Rng b(1);
  b.set_state_string(snap);
  for (int t = 0; t < 50; ++t) CHECK(b.uniform() == ahead[static_cast<std::size_t>(t)]);
}
