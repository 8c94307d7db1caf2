#include "lpjmm/model.hpp"

#include <cmath>
#include <limits>

#include "lpjmm/parallel.hpp"
#include "lpjmm/special.hpp"

namespace lpjmm {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

double log_normal_density(double v, double mean, double var) {
  const double d = v - mean;
  return -0.5 * (kLog2Pi + std::log(var) + d * d / var);
}

double log_gamma_density(double v, double shape, double rate) {
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(v) - rate * v;
}

double log_inv_gamma_density(double v, double shape, double rate) {
  return shape * std::log(rate) - std::lgamma(shape) - (shape + 1.0) * std::log(v) - rate / v;
}

}  // namespace

double edge_linear_predictor(int i, int j, int layer, const ModelState& state,
                             const AttributeVector& x) {
  if (i == j) throw std::invalid_argument("edge_linear_predictor: i == j");
  if (i < 0 || j < 0 || i >= state.n_actors() || j >= state.n_actors())
    throw std::invalid_argument("edge_linear_predictor: actor index out of range");
  if (layer < 0 || layer >= state.n_layers())
    throw std::invalid_argument("edge_linear_predictor: layer out of range");
  const double dx = std::abs(x.values[i] - x.values[j]);
  const double dz = (state.z.row(i) - state.z.row(j)).norm();
  return state.a[layer] + state.b[layer] * dx - state.theta[layer] * dz;
}

double edge_loglik(const MultiLayerNetwork& net, const ModelState& state,
                   const AttributeVector& x) {
  if (net.n_actors() != state.n_actors() || net.n_actors() != x.size())
    throw std::invalid_argument("edge_loglik: dimension mismatch");
  if (net.n_layers() != state.n_layers())
    throw std::invalid_argument("edge_loglik: layer count mismatch");
  const auto& pairs = net.pairs();
  const std::int64_t npairs = net.n_pairs();
  const std::int64_t total = npairs * net.n_layers();
  return blocked_sum(total, [&](std::int64_t t) {
    const int layer = static_cast<int>(t / npairs);
    const auto [i, j] = pairs[static_cast<std::size_t>(t % npairs)];
    const std::int8_t y = net.cell_at(layer, t % npairs);
    if (y == MultiLayerNetwork::kMissing) return 0.0;
    const double dx = std::abs(x.values[i] - x.values[j]);
    const double dz = (state.z.row(i) - state.z.row(j)).norm();
    const double eta = state.a[layer] + state.b[layer] * dx - state.theta[layer] * dz;
    return y == 1 ? log_normal_cdf(eta) : log_normal_cdf(-eta);
  });
}

Eigen::MatrixXd gp_covariance(const Eigen::MatrixXd& z, double phi, double sigma2, double tau2) {
  if (sigma2 <= 0.0 || tau2 <= 0.0)
    throw std::invalid_argument("gp_covariance: sigma2 and tau2 must be positive");
  if (phi < 0.0) throw std::invalid_argument("gp_covariance: phi must be nonnegative");
  const int n = static_cast<int>(z.rows());
  Eigen::MatrixXd cov(n, n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    cov(i, i) = tau2 + sigma2;
    for (int j = i + 1; j < n; ++j) {
      const double d = (z.row(i) - z.row(j)).norm();
      const double v = sigma2 * std::exp(-phi * d);
      cov(i, j) = v;
      cov(j, i) = v;
    }
  }
  return cov;
}

int cholesky_in_place(Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  for (int j = 0; j < n; ++j) {
    double d = a(j, j);
    for (int k = 0; k < j; ++k) d -= a(j, k) * a(j, k);
    if (!(d > 0.0)) return j;
    const double ljj = std::sqrt(d);
    a(j, j) = ljj;
    for (int i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (int k = 0; k < j; ++k) s -= a(i, k) * a(j, k);
      a(i, j) = s / ljj;
      a(j, i) = 0.0;
    }
  }
  return -1;
}

double attr_logdensity(const AttributeVector& x, const ModelState& state) {
  const int n = x.size();
  if (n != state.n_actors()) throw std::invalid_argument("attr_logdensity: dimension mismatch");
  Eigen::MatrixXd chol = gp_covariance(state.z, state.phi, state.sigma2, state.tau2);
  const int bad = cholesky_in_place(chol);
  if (bad >= 0) throw numerical_error("attr_logdensity: covariance not positive definite", bad);
  double logdet = 0.0;
  for (int i = 0; i < n; ++i) logdet += 2.0 * std::log(chol(i, i));
  const Eigen::VectorXd r = x.values.array() - state.beta;
  const Eigen::VectorXd y = chol.triangularView<Eigen::Lower>().solve(r);
  return -0.5 * (n * kLog2Pi + logdet + y.squaredNorm());
}

double mixture_logprior(const ModelState& state) {
  const int n = state.n_actors();
  const int k = state.latent_dim();
  const int h_count = state.n_groups();
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const int h = state.g[i];
    if (h < 1 || h > h_count) throw std::invalid_argument("mixture_logprior: label out of range");
    const double kap2 = state.kappa2[h - 1];
    const double ssq = (state.z.row(i) - state.mu.row(h - 1)).squaredNorm();
    total += std::log(state.omega[h - 1]) - 0.5 * k * (kLog2Pi + std::log(kap2)) - 0.5 * ssq / kap2;
  }
  return total;
}

double param_logprior(const ModelState& state, const Hyperparameters& hp) {
  if (state.phi < hp.u1 || state.phi > hp.u2) return -std::numeric_limits<double>::infinity();
  double total = 0.0;
  for (int l = 0; l < state.n_layers(); ++l) {
    total += log_normal_density(state.a[l], hp.m_a, hp.nu_a2);
    total += log_normal_density(state.b[l], hp.m_b, hp.nu_b2);
    total += log_gamma_density(state.theta[l], hp.lambda1, hp.lambda2);
  }
  total += log_normal_density(state.beta, 0.0, hp.nu_beta2);
  total += log_inv_gamma_density(state.sigma2, hp.eta1, hp.eta2);
  total += log_inv_gamma_density(state.tau2, hp.xi1, hp.xi2);
  total += -std::log(hp.u2 - hp.u1);
  // Dirichlet
  total += std::lgamma(hp.alpha.sum());
  for (int h = 0; h < hp.H; ++h) {
    total -= std::lgamma(hp.alpha[h]);
    total += (hp.alpha[h] - 1.0) * std::log(state.omega[h]);
  }
  for (int h = 0; h < hp.H; ++h) {
    for (int k = 0; k < hp.K; ++k)
      total += log_normal_density(state.mu(h, k), hp.m_mu[k], hp.nu_mu2);
    total += log_inv_gamma_density(state.kappa2[h], hp.gamma1, hp.gamma2);
  }
  return total;
}

double log_posterior(const ModelState& state, const MultiLayerNetwork& net,
                     const AttributeVector& x, const Hyperparameters& hp) {
  const double prior = param_logprior(state, hp);
  if (!std::isfinite(prior)) return prior;
  double total = edge_loglik(net, state, x);
  total += attr_logdensity(x, state);
  total += mixture_logprior(state);
  total += prior;
  return total;
}

}  // namespace lpjmm
