#include <doctest.h>

#include <cmath>

#include "lpjmm/netstats.hpp"
#include "lpjmm/special.hpp"
#include "stats_util.hpp"

using namespace lpjmm;

namespace {

MultiLayerNetwork complete_graph(int n) {
  MultiLayerNetwork net(n, 1);
  for (std::int64_t p = 0; p < net.n_pairs(); ++p) net.set_cell_at(0, p, 1);
  return net;
}

}  // namespace

TEST_CASE("density extremes") {
  MultiLayerNetwork empty(5, 1);
  CHECK(density(empty, 0) == 0.0);
  CHECK(density(complete_graph(5), 0) == 1.0);
  // observed-cells denominator under a mask
  MultiLayerNetwork masked = complete_graph(5);
  masked.set_cell(0, 0, 1, MultiLayerNetwork::kMissing);
  masked.set_cell(0, 2, 3, 0);
  CHECK(density(masked, 0) == doctest::Approx(8.0 / 9.0));
}

TEST_CASE("transitivity hand graphs") {
  // single triangle
  MultiLayerNetwork tri(3, 1);
  tri.set_cell(0, 0, 1, 1);
  tri.set_cell(0, 0, 2, 1);
  tri.set_cell(0, 1, 2, 1);
  CHECK(transitivity(tri, 0) == doctest::Approx(1.0));

  // star: hub with 4 leaves, no triangles
  MultiLayerNetwork star(5, 1);
  for (int leaf = 1; leaf < 5; ++leaf) star.set_cell(0, 0, leaf, 1);
  CHECK(transitivity(star, 0) == doctest::Approx(0.0));

  // no connected triples at all: documented 0 convention
  MultiLayerNetwork sparse(4, 1);
  sparse.set_cell(0, 0, 1, 1);
  sparse.set_cell(0, 2, 3, 1);
  CHECK(transitivity(sparse, 0) == 0.0);
}

TEST_CASE("categorical assortativity extremes") {
  // two groups, all edges within groups
  MultiLayerNetwork net(6, 1);
  net.set_cell(0, 0, 1, 1);
  net.set_cell(0, 1, 2, 1);
  net.set_cell(0, 3, 4, 1);
  net.set_cell(0, 4, 5, 1);
  const std::vector<int> groups = {1, 1, 1, 2, 2, 2};
  CHECK(assortativity_categorical(net, 0, groups) == doctest::Approx(1.0));
  // single group is degenerate
  CHECK(std::isnan(assortativity_categorical(net, 0, std::vector<int>(6, 1))));
  // no edges is degenerate
  MultiLayerNetwork empty(6, 1);
  CHECK(std::isnan(assortativity_categorical(empty, 0, groups)));
}

TEST_CASE("numeric assortativity sign and degeneracy") {
  MultiLayerNetwork net(4, 1);
  net.set_cell(0, 0, 1, 1);  // similar values connected
  net.set_cell(0, 2, 3, 1);
  Eigen::VectorXd attr(4);
  attr << 1.0, 1.1, 5.0, 5.2;
  CHECK(assortativity_numeric(net, 0, attr) > 0.9);

  Eigen::VectorXd flat = Eigen::VectorXd::Ones(4);
  CHECK(std::isnan(assortativity_numeric(net, 0, flat)));
}

TEST_CASE("statistics are invariant under actor relabeling") {
  ScenarioSpec spec = scenario_moderate_overlap();
  spec.n_actors = 30;
  spec.seed = 12;
  auto data = simulate_dataset(spec);
  const std::vector<int> perm = [&] {
    std::vector<int> p(30);
    for (int i = 0; i < 30; ++i) p[i] = (7 * i + 3) % 30;
    return p;
  }();
  MultiLayerNetwork pnet(30, 1);
  std::vector<int> pg(30);
  Eigen::VectorXd px(30);
  for (int i = 0; i < 30; ++i) {
    pg[perm[i]] = data.g[i];
    px[perm[i]] = data.x.values[i];
    for (int j = i + 1; j < 30; ++j) pnet.set_cell(0, perm[i], perm[j], data.net.cell(0, i, j));
  }
  CHECK(density(pnet, 0) == doctest::Approx(density(data.net, 0)));
  CHECK(transitivity(pnet, 0) == doctest::Approx(transitivity(data.net, 0)));
  CHECK(assortativity_categorical(pnet, 0, pg) ==
        doctest::Approx(assortativity_categorical(data.net, 0, data.g)));
  CHECK(assortativity_numeric(pnet, 0, px) ==
        doctest::Approx(assortativity_numeric(data.net, 0, data.x.values)));
}

TEST_CASE("simulate_dataset is deterministic in the seed") {
  ScenarioSpec spec = scenario_well_separated();
  spec.seed = 99;
  auto d1 = simulate_dataset(spec);
  auto d2 = simulate_dataset(spec);
  CHECK(d1.g == d2.g);
  CHECK((d1.z - d2.z).cwiseAbs().maxCoeff() == 0.0);
  CHECK((d1.x.values - d2.x.values).cwiseAbs().maxCoeff() == 0.0);
  for (std::int64_t p = 0; p < d1.net.n_pairs(); ++p)
    CHECK(d1.net.cell_at(0, p) == d2.net.cell_at(0, p));
}

TEST_CASE("simulate_dataset density matches Phi(a) when distances do not matter") {
  ScenarioSpec spec = scenario_moderate_overlap();
  spec.n_actors = 80;
  spec.b[0] = 0.0;
  spec.theta[0] = 1e-12;
  spec.a[0] = -0.8;
  const double p = normal_cdf(-0.8);
  double total = 0.0;
  const int reps = 30;
  std::int64_t cells = 0;
  for (int r = 0; r < reps; ++r) {
    spec.seed = 1000 + static_cast<std::uint64_t>(r);
    auto data = simulate_dataset(spec);
    total += static_cast<double>(data.net.n_edges(0));
    cells += data.net.n_pairs();
  }
  const double phat = total / static_cast<double>(cells);
  const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(cells));
  CHECK(std::abs(phat - p) < 3.0 * se);
}

TEST_CASE("moderate-overlap scenario reproduces the target summary statistics") {
  ScenarioSpec spec = scenario_moderate_overlap();
  std::vector<double> dens, trans, assort;
  for (int r = 0; r < 20; ++r) {
    spec.seed = 500 + static_cast<std::uint64_t>(r);
    auto data = simulate_dataset(spec);
    dens.push_back(density(data.net, 0));
    trans.push_back(transitivity(data.net, 0));
    assort.push_back(assortativity_categorical(data.net, 0, data.g));
  }
  CHECK(std::abs(testutil::mean_of(dens) - 0.1531) < 0.05);
  CHECK(std::abs(testutil::mean_of(trans) - 0.5049) < 0.10);
  CHECK(std::abs(testutil::mean_of(assort) - 0.5512) < 0.10);
}

TEST_CASE("well-separated scenario reproduces the target summary statistics") {
  ScenarioSpec spec = scenario_well_separated();
  std::vector<double> dens, trans, assort;
  for (int r = 0; r < 20; ++r) {
    spec.seed = 900 + static_cast<std::uint64_t>(r);
    auto data = simulate_dataset(spec);
    dens.push_back(density(data.net, 0));
    trans.push_back(transitivity(data.net, 0));
    assort.push_back(assortativity_categorical(data.net, 0, data.g));
  }
  CHECK(std::abs(testutil::mean_of(dens) - 0.1008) < 0.05);
  CHECK(std::abs(testutil::mean_of(trans) - 0.4822) < 0.10);
  CHECK(std::abs(testutil::mean_of(assort) - 0.8643) < 0.08);
}

TEST_CASE("apply_missingness counts, determinism, and recoverability") {
  ScenarioSpec spec = scenario_moderate_overlap();
  spec.seed = 7;
  auto data = simulate_dataset(spec);

  const MultiLayerNetwork same = apply_missingness(data.net, 0.0, 5);
  for (std::int64_t p = 0; p < same.n_pairs(); ++p)
    CHECK(same.cell_at(0, p) == data.net.cell_at(0, p));

  const MultiLayerNetwork half = apply_missingness(data.net, 0.5, 5);
  CHECK(half.n_missing(0) == 2475);  // round(0.5 * 4950)
  const MultiLayerNetwork half2 = apply_missingness(data.net, 0.5, 5);
  for (std::int64_t p = 0; p < half.n_pairs(); ++p)
    CHECK(half.cell_at(0, p) == half2.cell_at(0, p));
  // unmasked cells keep their original values
  for (std::int64_t p = 0; p < half.n_pairs(); ++p)
    if (half.cell_at(0, p) != MultiLayerNetwork::kMissing)
      CHECK(half.cell_at(0, p) == data.net.cell_at(0, p));

  CHECK_THROWS_AS(apply_missingness(data.net, 1.0, 5), std::invalid_argument);
  CHECK_THROWS_AS(apply_missingness(data.net, -0.1, 5), std::invalid_argument);
}

TEST_CASE("gof replicate count and extreme-state behavior") {
  ScenarioSpec spec = scenario_moderate_overlap();
  spec.n_actors = 20;
  spec.seed = 3;
  auto data = simulate_dataset(spec);

  ModelState st;
  st.z = data.z;
  st.g = data.g;
  st.a = Eigen::VectorXd::Constant(1, 40.0);  // eta >> 0 everywhere
  st.b = Eigen::VectorXd::Zero(1);
  st.theta = Eigen::VectorXd::Constant(1, 1e-9);
  st.beta = 0.0;
  st.sigma2 = 1.0;
  st.tau2 = 0.3;
  st.phi = 0.5;
  st.omega = Eigen::VectorXd::Constant(5, 0.2);
  st.mu = Eigen::MatrixXd::Zero(5, 2);
  st.kappa2 = Eigen::VectorXd::Ones(5);

  PosteriorChain chain;
  chain.meta.n_actors = 20;
  chain.meta.n_layers = 1;
  chain.meta.K = 2;
  chain.meta.H = 5;
  for (int d = 0; d < 57; ++d) {
    chain.draws.push_back(st);
    chain.loglik.push_back(0.0);
  }
  const GofReport rep = gof_replicates(chain, 20, 1, data.x, data.g, 10);
  CHECK(rep.density[0].size() == 5);  // floor(57 / 10)
  for (double v : rep.density[0]) CHECK(v == doctest::Approx(1.0));

  // deterministic in the seed
  const GofReport rep2 = gof_replicates(chain, 20, 1, data.x, data.g, 10);
  for (std::size_t r = 0; r < rep.density[0].size(); ++r)
    CHECK(rep.density[0][r] == rep2.density[0][r]);
}

TEST_CASE("replicates at the generating parameters bracket the observed statistics") {
  ScenarioSpec spec = scenario_moderate_overlap();
  spec.seed = 42;
  auto data = simulate_dataset(spec);

  ModelState st;
  st.z = data.z;
  st.g = data.g;
  st.a = spec.a;
  st.b = spec.b;
  st.theta = spec.theta;
  st.beta = spec.beta;
  st.sigma2 = spec.sigma2;
  st.tau2 = spec.tau2;
  st.phi = spec.phi;
  st.omega = spec.omega;
  st.mu = spec.mu;
  st.kappa2 = spec.kappa2;

  PosteriorChain chain;
  chain.meta.n_actors = spec.n_actors;
  chain.meta.n_layers = 1;
  chain.meta.K = 2;
  chain.meta.H = 5;
  for (int d = 0; d < 2000; ++d) chain.draws.push_back(st);
  chain.loglik.assign(2000, 0.0);

  const GofReport rep = gof_replicates(chain, spec.n_actors, 1, data.x, data.g, 10);
  const auto central = [](std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    return v[static_cast<std::size_t>(q * (v.size() - 1))];
  };
  const double obs_density = density(data.net, 0);
  const double obs_trans = transitivity(data.net, 0);
  const double obs_assort = assortativity_categorical(data.net, 0, data.g);
  CHECK(obs_density >= central(rep.density[0], 0.025));
  CHECK(obs_density <= central(rep.density[0], 0.975));
  CHECK(obs_trans >= central(rep.transitivity[0], 0.025));
  CHECK(obs_trans <= central(rep.transitivity[0], 0.975));
  CHECK(obs_assort >= central(rep.assort_cat[0], 0.025));
  CHECK(obs_assort <= central(rep.assort_cat[0], 0.975));
}

TEST_CASE("two-layer scenario: second layer statistics near the reference values") {
  ScenarioSpec spec = scenario_moderate_overlap();
  add_layer(spec, 3.0, 1.0, 4.0);
  std::vector<double> dens2, trans2, assort2;
  for (int r = 0; r < 20; ++r) {
    spec.seed = 1500 + static_cast<std::uint64_t>(r);
    auto data = simulate_dataset(spec);
    dens2.push_back(density(data.net, 1));
    trans2.push_back(transitivity(data.net, 1));
    assort2.push_back(assortativity_categorical(data.net, 1, data.g));
  }
  CHECK(std::abs(testutil::mean_of(dens2) - 0.1024) < 0.05);
  CHECK(std::abs(testutil::mean_of(trans2) - 0.5477) < 0.12);
  CHECK(std::abs(testutil::mean_of(assort2) - 0.6923) < 0.10);
}
