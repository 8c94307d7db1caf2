#include "lpjmm/netstats.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "lpjmm/model.hpp"
#include "lpjmm/rng.hpp"
#include "lpjmm/special.hpp"

namespace lpjmm {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

double density(const MultiLayerNetwork& net, int layer) {
  if (net.n_actors() < 2) throw std::invalid_argument("density: need at least 2 actors");
  const std::int64_t observed = net.n_observed(layer);
  if (observed == 0) return kNaN;
  return static_cast<double>(net.n_edges(layer)) / static_cast<double>(observed);
}

double transitivity(const MultiLayerNetwork& net, int layer) {
  const int n = net.n_actors();
  if (n < 3) throw std::invalid_argument("transitivity: need at least 3 actors");
  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  for (std::int64_t p = 0; p < net.n_pairs(); ++p) {
    if (net.cell_at(layer, p) == 1) {
      const auto [i, j] = net.pairs()[static_cast<std::size_t>(p)];
      adj[i][j] = adj[j][i] = true;
    }
  }
  std::vector<int> deg(n, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) deg[i] += adj[i][j];
  std::int64_t triples = 0;
  for (int i = 0; i < n; ++i) triples += static_cast<std::int64_t>(deg[i]) * (deg[i] - 1) / 2;
  std::int64_t triangles = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (!adj[i][j]) continue;
      for (int k = j + 1; k < n; ++k)
        if (adj[i][k] && adj[j][k]) ++triangles;
    }
  if (triples == 0) return 0.0;
  return 3.0 * static_cast<double>(triangles) / static_cast<double>(triples);
}

double assortativity_categorical(const MultiLayerNetwork& net, int layer,
                                 const std::vector<int>& labels) {
  const int n = net.n_actors();
  if (static_cast<int>(labels.size()) != n)
    throw std::invalid_argument("assortativity: label length mismatch");
  int groups = 0;
  for (int v : labels) groups = std::max(groups, v);
  std::int64_t edges = 0;
  Eigen::MatrixXd mix = Eigen::MatrixXd::Zero(groups, groups);
  for (std::int64_t p = 0; p < net.n_pairs(); ++p) {
    if (net.cell_at(layer, p) != 1) continue;
    const auto [i, j] = net.pairs()[static_cast<std::size_t>(p)];
    mix(labels[i] - 1, labels[j] - 1) += 1.0;
    mix(labels[j] - 1, labels[i] - 1) += 1.0;
    ++edges;
  }
  if (edges == 0 || groups < 2) return kNaN;
  mix /= 2.0 * static_cast<double>(edges);
  const double trace = mix.trace();
  double marg = 0.0;
  for (int h = 0; h < groups; ++h) marg += mix.row(h).sum() * mix.col(h).sum();
  if (marg == 1.0) return kNaN;
  return (trace - marg) / (1.0 - marg);
}

double assortativity_numeric(const MultiLayerNetwork& net, int layer,
                             const Eigen::VectorXd& attr) {
  const int n = net.n_actors();
  if (attr.size() != n) throw std::invalid_argument("assortativity: attribute length mismatch");
  // both orientations of each edge; correlation of endpoint values
  double sx = 0, sxx = 0, sxy = 0;
  std::int64_t m = 0;
  for (std::int64_t p = 0; p < net.n_pairs(); ++p) {
    if (net.cell_at(layer, p) != 1) continue;
    const auto [i, j] = net.pairs()[static_cast<std::size_t>(p)];
    sx += attr[i] + attr[j];
    sxx += attr[i] * attr[i] + attr[j] * attr[j];
    sxy += 2.0 * attr[i] * attr[j];
    m += 2;
  }
  if (m == 0) return kNaN;
  const double md = static_cast<double>(m);
  const double var = sxx / md - (sx / md) * (sx / md);
  if (!(var > 0.0)) return kNaN;
  const double cov = sxy / md - (sx / md) * (sx / md);
  return cov / var;
}

void ScenarioSpec::validate() const {
  if (n_actors < 2 || n_layers < 1 || K < 1 || H < 1)
    throw std::invalid_argument("scenario: bad dimensions");
  if (omega.size() != H || mu.rows() != H || mu.cols() != K || kappa2.size() != H)
    throw std::invalid_argument("scenario: mixture shape mismatch");
  if ((omega.array() <= 0).any() || std::abs(omega.sum() - 1.0) > 1e-8)
    throw std::invalid_argument("scenario: omega must be simplex weights");
  if ((kappa2.array() <= 0).any() || sigma2 <= 0 || tau2 <= 0 || phi < 0)
    throw std::invalid_argument("scenario: variances must be positive");
  if (a.size() != n_layers || b.size() != n_layers || theta.size() != n_layers)
    throw std::invalid_argument("scenario: layer parameter shape mismatch");
  if ((theta.array() <= 0).any()) throw std::invalid_argument("scenario: theta must be positive");
}

// RNG order: g (one categorical per actor), z (K normals per actor), x
// (N normals through the covariance factor), then edges layer by layer in
// pair order.
SimulatedDataset simulate_dataset(const ScenarioSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const int n = spec.n_actors;
  const int K = spec.K;

  std::vector<int> g(n);
  std::vector<double> logw(spec.H);
  for (int h = 0; h < spec.H; ++h) logw[h] = std::log(spec.omega[h]);
  for (int i = 0; i < n; ++i) g[i] = 1 + rng.categorical_from_log(logw);

  Eigen::MatrixXd z(n, K);
  for (int i = 0; i < n; ++i) {
    const int h = g[i] - 1;
    const double sd = std::sqrt(spec.kappa2[h]);
    for (int k = 0; k < K; ++k) z(i, k) = rng.normal(spec.mu(h, k), sd);
  }

  Eigen::MatrixXd chol = gp_covariance(z, spec.phi, spec.sigma2, spec.tau2);
  if (cholesky_in_place(chol) >= 0)
    throw numerical_error("simulate_dataset: covariance not positive definite");
  Eigen::VectorXd eps(n);
  for (int i = 0; i < n; ++i) eps[i] = rng.normal();
  AttributeVector x;
  x.values = Eigen::VectorXd::Constant(n, spec.beta) +
             chol.triangularView<Eigen::Lower>() * eps;

  MultiLayerNetwork net(n, spec.n_layers);
  const auto& pairs = net.pairs();
  for (int l = 0; l < spec.n_layers; ++l) {
    for (std::int64_t p = 0; p < net.n_pairs(); ++p) {
      const auto [i, j] = pairs[static_cast<std::size_t>(p)];
      const double eta = spec.a[l] + spec.b[l] * std::abs(x.values[i] - x.values[j]) -
                         spec.theta[l] * (z.row(i) - z.row(j)).norm();
      net.set_cell_at(l, p, rng.bernoulli(normal_cdf(eta)) ? 1 : 0);
    }
  }
  return SimulatedDataset{std::move(net), std::move(x), std::move(z), std::move(g)};
}

namespace {

ScenarioSpec five_group_ring(double radius, double kappa2) {
  ScenarioSpec spec;
  spec.n_actors = 100;
  spec.n_layers = 1;
  spec.K = 2;
  spec.H = 5;
  spec.omega = Eigen::VectorXd::Constant(5, 0.2);
  spec.mu.resize(5, 2);
  for (int h = 0; h < 5; ++h) {
    const double ang = 2.0 * M_PI * h / 5.0;
    spec.mu(h, 0) = radius * std::cos(ang);
    spec.mu(h, 1) = radius * std::sin(ang);
  }
  spec.kappa2 = Eigen::VectorXd::Constant(5, kappa2);
  spec.a = Eigen::VectorXd::Zero(1);
  spec.b = Eigen::VectorXd::Zero(1);
  spec.theta = Eigen::VectorXd::Ones(1);
  return spec;
}

}  // namespace

ScenarioSpec scenario_moderate_overlap() {
  ScenarioSpec spec = five_group_ring(1.7, 0.35);
  spec.beta = 0.0;
  spec.sigma2 = 1.0;
  spec.tau2 = 0.3;
  spec.phi = 0.5;
  spec.a[0] = 5.0;
  spec.b[0] = -2.0;
  spec.theta[0] = 2.72;
  return spec;
}

ScenarioSpec scenario_well_separated() {
  ScenarioSpec spec = five_group_ring(3.2, 0.30);
  spec.beta = 0.0;
  spec.sigma2 = 1.0;
  spec.tau2 = 0.2;
  spec.phi = 0.3;
  spec.a[0] = 1.0;
  spec.b[0] = 3.5;
  spec.theta[0] = 1.25;
  return spec;
}

void add_layer(ScenarioSpec& spec, double a, double b, double theta) {
  const auto grow = [](Eigen::VectorXd& v, double value) {
    v.conservativeResize(v.size() + 1);
    v[v.size() - 1] = value;
  };
  grow(spec.a, a);
  grow(spec.b, b);
  grow(spec.theta, theta);
  spec.n_layers += 1;
}

MultiLayerNetwork apply_missingness(const MultiLayerNetwork& net, double fraction,
                                    std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction < 1.0))
    throw std::invalid_argument("apply_missingness: fraction must be in [0, 1)");
  MultiLayerNetwork out = net;
  if (fraction == 0.0) return out;
  Rng rng(seed);
  const std::int64_t npairs = net.n_pairs();
  const auto count = static_cast<std::int64_t>(std::llround(fraction * static_cast<double>(npairs)));
  std::vector<std::int64_t> idx(static_cast<std::size_t>(npairs));
  for (int l = 0; l < net.n_layers(); ++l) {
    std::iota(idx.begin(), idx.end(), 0);
    // partial Fisher-Yates: first `count` slots are the masked pairs
    for (std::int64_t t = 0; t < count; ++t) {
      const auto pick = t + static_cast<std::int64_t>(rng.uniform() * static_cast<double>(npairs - t));
      std::swap(idx[static_cast<std::size_t>(t)],
                idx[static_cast<std::size_t>(std::min(pick, npairs - 1))]);
      out.set_cell_at(l, idx[static_cast<std::size_t>(t)], MultiLayerNetwork::kMissing);
    }
  }
  return out;
}

GofReport gof_replicates(const PosteriorChain& chain, int n_actors, int n_layers,
                         const AttributeVector& x, const std::vector<int>& reference_partition,
                         int stride, bool regenerate_attributes, std::uint64_t seed) {
  if (chain.draws.empty()) throw std::invalid_argument("gof_replicates: empty chain");
  if (stride < 1) throw std::invalid_argument("gof_replicates: stride must be >= 1");
  const auto n_rep = static_cast<int>(chain.draws.size() / static_cast<std::size_t>(stride));
  GofReport rep;
  rep.stride = stride;
  rep.density.assign(n_layers, std::vector<double>(n_rep, kNaN));
  rep.transitivity = rep.density;
  rep.assort_cat = rep.density;
  rep.assort_num = rep.density;

#pragma omp parallel for schedule(dynamic)
  for (int r = 0; r < n_rep; ++r) {
    const std::size_t draw_index = static_cast<std::size_t>(r + 1) * stride - 1;
    const ModelState& st = chain.draws[draw_index];
    Rng rng(seed + static_cast<std::uint64_t>(draw_index));
    Eigen::VectorXd xv = x.values;
    if (regenerate_attributes) {
      Eigen::MatrixXd chol = gp_covariance(st.z, st.phi, st.sigma2, st.tau2);
      if (cholesky_in_place(chol) < 0) {
        Eigen::VectorXd eps(n_actors);
        for (int i = 0; i < n_actors; ++i) eps[i] = rng.normal();
        xv = Eigen::VectorXd::Constant(n_actors, st.beta) +
             chol.triangularView<Eigen::Lower>() * eps;
      }
    }
    MultiLayerNetwork sim(n_actors, n_layers);
    const auto& pairs = sim.pairs();
    for (int l = 0; l < n_layers; ++l) {
      for (std::int64_t p = 0; p < sim.n_pairs(); ++p) {
        const auto [i, j] = pairs[static_cast<std::size_t>(p)];
        const double eta = st.a[l] + st.b[l] * std::abs(xv[i] - xv[j]) -
                           st.theta[l] * (st.z.row(i) - st.z.row(j)).norm();
        sim.set_cell_at(l, p, rng.bernoulli(normal_cdf(eta)) ? 1 : 0);
      }
    }
    for (int l = 0; l < n_layers; ++l) {
      rep.density[l][r] = density(sim, l);
      rep.transitivity[l][r] = transitivity(sim, l);
      rep.assort_cat[l][r] = assortativity_categorical(sim, l, reference_partition);
      rep.assort_num[l][r] = assortativity_numeric(sim, l, x.values);
    }
  }

  const auto finite_mean = [](const std::vector<double>& v) {
    double s = 0.0;
    long c = 0;
    for (double t : v)
      if (std::isfinite(t)) {
        s += t;
        ++c;
      }
    return c > 0 ? s / static_cast<double>(c) : kNaN;
  };
  for (int l = 0; l < n_layers; ++l) {
    rep.mean_density.push_back(finite_mean(rep.density[l]));
    rep.mean_transitivity.push_back(finite_mean(rep.transitivity[l]));
    rep.mean_assort_cat.push_back(finite_mean(rep.assort_cat[l]));
    rep.mean_assort_num.push_back(finite_mean(rep.assort_num[l]));
  }
  return rep;
}

}  // namespace lpjmm
