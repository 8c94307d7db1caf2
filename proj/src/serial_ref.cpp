#include <cmath>

#include "lpjmm/model.hpp"
#include "lpjmm/special.hpp"

namespace lpjmm::serial_ref {

double edge_loglik(const MultiLayerNetwork& net, const ModelState& state,
                   const AttributeVector& x) {
  double total = 0.0;
  for (int l = 0; l < net.n_layers(); ++l) {
    for (int i = 0; i < net.n_actors(); ++i) {
      for (int j = i + 1; j < net.n_actors(); ++j) {
        const std::int8_t y = net.cell(l, i, j);
        if (y == MultiLayerNetwork::kMissing) continue;
        const double eta = edge_linear_predictor(i, j, l, state, x);
        total += y == 1 ? log_normal_cdf(eta) : log_normal_cdf(-eta);
      }
    }
  }
  return total;
}

Eigen::MatrixXd gp_covariance(const Eigen::MatrixXd& z, double phi, double sigma2, double tau2) {
  const int n = static_cast<int>(z.rows());
  Eigen::MatrixXd cov(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) {
        cov(i, j) = tau2 + sigma2;
      } else {
        cov(i, j) = sigma2 * std::exp(-phi * (z.row(i) - z.row(j)).norm());
      }
    }
  }
  return cov;
}

double attr_logdensity(const AttributeVector& x, const ModelState& state) {
  const int n = x.size();
  const Eigen::MatrixXd cov = gp_covariance(state.z, state.phi, state.sigma2, state.tau2);
  const Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw numerical_error("serial_ref::attr_logdensity: factorization failed");
  const Eigen::VectorXd r = x.values.array() - state.beta;
  double logdet = 0.0;
  for (int i = 0; i < n; ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
  const double quad = r.dot(llt.solve(r));
  return -0.5 * (n * 1.8378770664093454836 + logdet + quad);
}

}  // namespace lpjmm::serial_ref
