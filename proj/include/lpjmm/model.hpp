#pragma once

#include <Eigen/Dense>

#include "lpjmm/types.hpp"

namespace lpjmm {

// eta = a_l + b_l |x_i - x_j| - theta_l ||z_i - z_j||. Symmetric in (i, j).
double edge_linear_predictor(int i, int j, int layer, const ModelState& state,
                             const AttributeVector& x);

// Sum over layers and observed unordered pairs of
// y log Phi(eta) + (1 - y) log Phi(-eta). Missing cells contribute nothing.
// OpenMP-parallel with a fixed reduction order.
double edge_loglik(const MultiLayerNetwork& net, const ModelState& state,
                   const AttributeVector& x);

// Exponential-kernel covariance: diag tau2 + sigma2, off-diagonal
// sigma2 exp(-phi ||z_i - z_j||).
Eigen::MatrixXd gp_covariance(const Eigen::MatrixXd& z, double phi, double sigma2, double tau2);

// In-place lower Cholesky of a symmetric positive definite matrix. Returns -1
// on success, else the 0-based index of the first non-positive leading minor.
int cholesky_in_place(Eigen::MatrixXd& a);

// log N_N(x; beta 1, sigma2 M(z, phi) + tau2 I). Throws numerical_error with
// the failing minor index if the covariance is numerically indefinite.
double attr_logdensity(const AttributeVector& x, const ModelState& state);

// Completed-data mixture term: sum_i log omega_{g_i} + log N_K(z_i; mu_{g_i},
// kappa2_{g_i} I).
double mixture_logprior(const ModelState& state);

// Sum of the parameter log prior densities (a, b, theta, beta, sigma2, tau2,
// phi, omega, mu, kappa2), including all normalizing constants. Returns -inf
// when phi falls outside [u1, u2].
double param_logprior(const ModelState& state, const Hyperparameters& hp);

// Full unnormalized log posterior: edge_loglik + attr_logdensity +
// mixture_logprior + param_logprior, accumulated in exactly that order. The
// only constant dropped is the model evidence (the normalizer of the
// posterior itself); every tier keeps its (2pi) and prior normalizers.
double log_posterior(const ModelState& state, const MultiLayerNetwork& net,
                     const AttributeVector& x, const Hyperparameters& hp);

// Plain-loop single-thread implementations, kept as the reference path for
// kernel tests and the benchmark.
namespace serial_ref {
double edge_loglik(const MultiLayerNetwork& net, const ModelState& state,
                   const AttributeVector& x);
Eigen::MatrixXd gp_covariance(const Eigen::MatrixXd& z, double phi, double sigma2, double tau2);
double attr_logdensity(const AttributeVector& x, const ModelState& state);
}  // namespace serial_ref

}  // namespace lpjmm
