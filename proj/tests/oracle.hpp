// Independent brute-force oracles, coded term by term from the model density.
// Deliberately uses different numerical routes than the library (long-double
// erfc for the probit terms, LU instead of Cholesky for the Gaussian tier).
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "lpjmm/types.hpp"

namespace oracle {

inline double log_phi(double x) {
  // adequate for |x| <= ~30, which the oracle states stay inside
  const long double p = 0.5L * erfcl(-static_cast<long double>(x) / 1.41421356237309504880L);
  return static_cast<double>(logl(p));
}

inline double log_normal(double v, double mean, double var) {
  const double d = v - mean;
  return -0.5 * std::log(2.0 * M_PI * var) - 0.5 * d * d / var;
}

inline double edge_term(const lpjmm::MultiLayerNetwork& net, const lpjmm::ModelState& s,
                        const lpjmm::AttributeVector& x) {
  double total = 0.0;
  for (int l = 0; l < net.n_layers(); ++l)
    for (int i = 0; i < net.n_actors(); ++i)
      for (int j = i + 1; j < net.n_actors(); ++j) {
        const auto y = net.cell(l, i, j);
        if (y == lpjmm::MultiLayerNetwork::kMissing) continue;
        const double eta = s.a[l] + s.b[l] * std::abs(x.values[i] - x.values[j]) -
                           s.theta[l] * std::sqrt((s.z.row(i) - s.z.row(j)).squaredNorm());
        total += y == 1 ? log_phi(eta) : log_phi(-eta);
      }
  return total;
}

inline double attr_term(const lpjmm::ModelState& s, const lpjmm::AttributeVector& x) {
  const int n = static_cast<int>(x.values.size());
  Eigen::MatrixXd cov(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      cov(i, j) = i == j ? s.tau2 + s.sigma2
                         : s.sigma2 * std::exp(-s.phi * (s.z.row(i) - s.z.row(j)).norm());
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(cov);
  const Eigen::VectorXd r = x.values.array() - s.beta;
  const double quad = r.dot(lu.solve(r));
  const double logdet = lu.matrixLU().diagonal().array().abs().log().sum();
  return -0.5 * n * std::log(2.0 * M_PI) - 0.5 * logdet - 0.5 * quad;
}

inline double mixture_term(const lpjmm::ModelState& s) {
  double total = 0.0;
  for (int i = 0; i < s.n_actors(); ++i) {
    const int h = s.g[i] - 1;
    total += std::log(s.omega[h]);
    for (int k = 0; k < s.latent_dim(); ++k)
      total += log_normal(s.z(i, k), s.mu(h, k), s.kappa2[h]);
  }
  return total;
}

inline double prior_term(const lpjmm::ModelState& s, const lpjmm::Hyperparameters& hp) {
  double total = 0.0;
  for (int l = 0; l < s.n_layers(); ++l) {
    total += log_normal(s.a[l], hp.m_a, hp.nu_a2);
    total += log_normal(s.b[l], hp.m_b, hp.nu_b2);
    total += hp.lambda1 * std::log(hp.lambda2) - std::lgamma(hp.lambda1) +
             (hp.lambda1 - 1.0) * std::log(s.theta[l]) - hp.lambda2 * s.theta[l];
  }
  total += log_normal(s.beta, 0.0, hp.nu_beta2);
  const auto invg = [](double v, double sh, double ra) {
    return sh * std::log(ra) - std::lgamma(sh) - (sh + 1.0) * std::log(v) - ra / v;
  };
  total += invg(s.sigma2, hp.eta1, hp.eta2);
  total += invg(s.tau2, hp.xi1, hp.xi2);
  total += -std::log(hp.u2 - hp.u1);
  total += std::lgamma(hp.alpha.sum());
  for (int h = 0; h < hp.H; ++h)
    total += -std::lgamma(hp.alpha[h]) + (hp.alpha[h] - 1.0) * std::log(s.omega[h]);
  for (int h = 0; h < hp.H; ++h) {
    for (int k = 0; k < hp.K; ++k) total += log_normal(s.mu(h, k), hp.m_mu[k], hp.nu_mu2);
    total += invg(s.kappa2[h], hp.gamma1, hp.gamma2);
  }
  return total;
}

inline double log_posterior(const lpjmm::ModelState& s, const lpjmm::MultiLayerNetwork& net,
                            const lpjmm::AttributeVector& x, const lpjmm::Hyperparameters& hp) {
  return edge_term(net, s, x) + attr_term(s, x) + mixture_term(s) + prior_term(s, hp);
}

// Random interior state + complete network + attribute for oracle checks.
struct RandomProblem {
  lpjmm::ModelState state;
  lpjmm::MultiLayerNetwork net;
  lpjmm::AttributeVector x;
};

inline RandomProblem random_problem(std::mt19937& gen, int n, int k, int h, int l,
                                    const lpjmm::Hyperparameters& hp) {
  std::normal_distribution<double> norm(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  lpjmm::ModelState s;
  s.z.resize(n, k);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < k; ++c) s.z(i, c) = 1.5 * norm(gen);
  s.g.resize(n);
  for (int i = 0; i < n; ++i) s.g[i] = 1 + static_cast<int>(unif(gen) * h) % h;
  s.a.resize(l);
  s.b.resize(l);
  s.theta.resize(l);
  for (int t = 0; t < l; ++t) {
    s.a[t] = 2.0 * norm(gen);
    s.b[t] = 2.0 * norm(gen);
    s.theta[t] = 0.5 + 2.5 * unif(gen);
  }
  s.beta = norm(gen);
  s.sigma2 = 0.5 + 1.5 * unif(gen);
  s.tau2 = 0.3 + 0.7 * unif(gen);
  s.phi = hp.u1 + (hp.u2 - hp.u1) * (0.1 + 0.8 * unif(gen));
  Eigen::VectorXd w(h);
  for (int t = 0; t < h; ++t) w[t] = 0.2 + unif(gen);
  s.omega = w / w.sum();
  s.mu.resize(h, k);
  for (int t = 0; t < h; ++t)
    for (int c = 0; c < k; ++c) s.mu(t, c) = norm(gen);
  s.kappa2.resize(h);
  for (int t = 0; t < h; ++t) s.kappa2[t] = 0.3 + 1.7 * unif(gen);

  lpjmm::MultiLayerNetwork net(n, l);
  for (int t = 0; t < l; ++t)
    for (std::int64_t p = 0; p < net.n_pairs(); ++p)
      net.set_cell_at(t, p, unif(gen) < 0.4 ? 1 : 0);
  lpjmm::AttributeVector x;
  x.values.resize(n);
  for (int i = 0; i < n; ++i) x.values[i] = norm(gen);
  return {std::move(s), std::move(net), std::move(x)};
}

// Random K x K orthogonal matrix (Householder QR of a Gaussian matrix, sign
// fixed so both rotations and reflections occur).
inline Eigen::MatrixXd random_orthogonal(std::mt19937& gen, int k) {
  std::normal_distribution<double> norm(0.0, 1.0);
  Eigen::MatrixXd m(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) m(i, j) = norm(gen);
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  Eigen::MatrixXd q = qr.householderQ();
  if (norm(gen) < 0.0) q.col(0) = -q.col(0);
  return q;
}

}  // namespace oracle
