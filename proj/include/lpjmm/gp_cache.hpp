#pragma once

#include <Eigen/Dense>

#include "lpjmm/types.hpp"

namespace lpjmm {

// Cached factorization state for the attribute tier. Holds Sigma, its
// inverse, log|Sigma| and the quadratic form r' Sigma^-1 r with
// r = x - beta 1. Moving one actor changes only row/column i of Sigma, which
// is a symmetric rank-2 perturbation; eval_row_move/apply_row_move exploit
// that in O(N^2) instead of refactorizing. Callers refactorize once per sweep
// (rebuild) to stop rounding drift from accumulating.
class GpCache {
 public:
  GpCache() = default;

  void rebuild(const Eigen::MatrixXd& z, double phi, double sigma2, double tau2,
               const Eigen::VectorXd& x, double beta);

  int size() const { return n_; }
  double logdet() const { return logdet_; }
  double quad() const { return quad_; }
  double attr_loglik() const;
  const Eigen::MatrixXd& sigma() const { return sigma_; }
  const Eigen::MatrixXd& sigma_inv() const { return sigma_inv_; }

  struct RowMove {
    int i = -1;
    bool valid = false;       // false: capacitance lost positivity, caller must rebuild
    double new_logdet = 0.0;
    double new_quad = 0.0;
    Eigen::VectorXd u;        // new row minus old row, u[i] = 0
    Eigen::VectorXd w;        // Sigma^-1 u
    double k11 = 0, k12 = 0, k22 = 0;  // capacitance K = C^-1 + V' Sigma^-1 V
  };

  // new_row is the candidate Sigma(i, :); entry i is ignored (diagonal fixed).
  RowMove eval_row_move(int i, const Eigen::VectorXd& new_row) const;

  void apply_row_move(const RowMove& move);

  // Refresh everything that depends on r = x - beta 1.
  void set_mean(const Eigen::VectorXd& x, double beta);

  // For the conjugate beta draw: (1' Sigma^-1 1, 1' Sigma^-1 x).
  std::pair<double, double> ones_products(const Eigen::VectorXd& x) const;

 private:
  int n_ = 0;
  Eigen::MatrixXd sigma_, sigma_inv_;
  Eigen::VectorXd r_, sigma_inv_r_;
  double logdet_ = 0.0, quad_ = 0.0;
};

}  // namespace lpjmm
