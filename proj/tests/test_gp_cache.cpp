#include <doctest.h>

#include <cmath>
#include <random>

#include "lpjmm/gp_cache.hpp"
#include "lpjmm/model.hpp"
#include "oracle.hpp"

using namespace lpjmm;

TEST_CASE("row move matches a fresh factorization") {
  std::mt19937 gen(7);
  Hyperparameters hp(2, 2);
  auto prob = oracle::random_problem(gen, 12, 2, 2, 1, hp);
  ModelState& s = prob.state;

  GpCache cache;
  cache.rebuild(s.z, s.phi, s.sigma2, s.tau2, prob.x.values, s.beta);
  const double base_ll = cache.attr_loglik();
  CHECK(base_ll == doctest::Approx(attr_logdensity(prob.x, s)).epsilon(1e-12));

  std::normal_distribution<double> norm(0.0, 0.6);
  for (int rep = 0; rep < 30; ++rep) {
    const int i = rep % 12;
    Eigen::RowVector2d znew = s.z.row(i) + Eigen::RowVector2d(norm(gen), norm(gen));
    Eigen::VectorXd new_row(12);
    for (int j = 0; j < 12; ++j)
      new_row[j] = j == i ? s.tau2 + s.sigma2
                          : s.sigma2 * std::exp(-s.phi * (znew - s.z.row(j)).norm());
    const auto move = cache.eval_row_move(i, new_row);
    REQUIRE(move.valid);

    ModelState cand = s;
    cand.z.row(i) = znew;
    const double expect = attr_logdensity(prob.x, cand);
    const double got = -0.5 * (12 * std::log(2.0 * M_PI) + move.new_logdet + move.new_quad);
    CHECK(got == doctest::Approx(expect).epsilon(1e-9));

    // apply every other move so the cache state itself drifts through updates
    if (rep % 2 == 0) {
      cache.apply_row_move(move);
      s.z.row(i) = znew;
      CHECK(cache.attr_loglik() == doctest::Approx(attr_logdensity(prob.x, s)).epsilon(1e-9));
    }
  }

  // rebuild cleans any accumulated drift
  cache.rebuild(s.z, s.phi, s.sigma2, s.tau2, prob.x.values, s.beta);
  CHECK(cache.attr_loglik() == doctest::Approx(attr_logdensity(prob.x, s)).epsilon(1e-12));
}

TEST_CASE("set_mean refreshes the quadratic form") {
  std::mt19937 gen(9);
  Hyperparameters hp(2, 2);
  auto prob = oracle::random_problem(gen, 8, 2, 2, 1, hp);
  GpCache cache;
  cache.rebuild(prob.state.z, prob.state.phi, prob.state.sigma2, prob.state.tau2,
                prob.x.values, prob.state.beta);
  ModelState moved = prob.state;
  moved.beta = prob.state.beta + 0.8;
  cache.set_mean(prob.x.values, moved.beta);
  CHECK(cache.attr_loglik() == doctest::Approx(attr_logdensity(prob.x, moved)).epsilon(1e-12));
}

TEST_CASE("ones products agree with direct solves") {
  std::mt19937 gen(11);
  Hyperparameters hp(2, 2);
  auto prob = oracle::random_problem(gen, 9, 2, 2, 1, hp);
  GpCache cache;
  cache.rebuild(prob.state.z, prob.state.phi, prob.state.sigma2, prob.state.tau2,
                prob.x.values, prob.state.beta);
  const Eigen::MatrixXd cov =
      gp_covariance(prob.state.z, prob.state.phi, prob.state.sigma2, prob.state.tau2);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(9);
  const auto [s11, s1x] = cache.ones_products(prob.x.values);
  CHECK(s11 == doctest::Approx(ones.dot(cov.llt().solve(ones))).epsilon(1e-10));
  CHECK(s1x == doctest::Approx(ones.dot(cov.llt().solve(prob.x.values))).epsilon(1e-10));
}
