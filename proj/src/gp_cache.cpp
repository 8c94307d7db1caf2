#include "lpjmm/gp_cache.hpp"

#include <cmath>

#include "lpjmm/model.hpp"

namespace lpjmm {

void GpCache::rebuild(const Eigen::MatrixXd& z, double phi, double sigma2, double tau2,
                      const Eigen::VectorXd& x, double beta) {
  n_ = static_cast<int>(z.rows());
  sigma_ = gp_covariance(z, phi, sigma2, tau2);
  Eigen::MatrixXd chol = sigma_;
  const int bad = cholesky_in_place(chol);
  if (bad >= 0) throw numerical_error("GpCache: covariance not positive definite", bad);
  logdet_ = 0.0;
  for (int i = 0; i < n_; ++i) logdet_ += 2.0 * std::log(chol(i, i));
  const Eigen::MatrixXd linv =
      chol.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(n_, n_));
  sigma_inv_.noalias() = linv.transpose() * linv;
  set_mean(x, beta);
}

double GpCache::attr_loglik() const {
  return -0.5 * (n_ * 1.8378770664093454836 + logdet_ + quad_);
}

void GpCache::set_mean(const Eigen::VectorXd& x, double beta) {
  r_ = x.array() - beta;
  sigma_inv_r_.noalias() = sigma_inv_ * r_;
  quad_ = r_.dot(sigma_inv_r_);
}

std::pair<double, double> GpCache::ones_products(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd rowsum = sigma_inv_.rowwise().sum();
  return {rowsum.sum(), rowsum.dot(x)};
}

GpCache::RowMove GpCache::eval_row_move(int i, const Eigen::VectorXd& new_row) const {
  RowMove m;
  m.i = i;
  m.u = new_row - sigma_.col(i);
  m.u[i] = 0.0;
  m.w.noalias() = sigma_inv_ * m.u;
  const double p = sigma_inv_(i, i);
  const double q = m.w[i];
  const double s = m.u.dot(m.w);
  // Sigma' = Sigma + e_i u' + u e_i'; determinant shifts by (1+q)^2 - p s.
  const double dm = (1.0 + q) * (1.0 + q) - p * s;
  if (!(dm > 0.0)) return m;  // valid stays false
  m.k11 = p;
  m.k12 = 1.0 + q;
  m.k22 = s;
  m.new_logdet = logdet_ + std::log(dm);
  const double a1 = sigma_inv_r_[i];
  const double a2 = m.u.dot(sigma_inv_r_);
  m.new_quad = quad_ + (m.k22 * a1 * a1 - 2.0 * m.k12 * a1 * a2 + m.k11 * a2 * a2) / dm;
  m.valid = true;
  return m;
}

void GpCache::apply_row_move(const RowMove& m) {
  const int i = m.i;
  // B = Sigma^-1 [e_i u] = [col_i w]; Sigma'^-1 = Sigma^-1 - B K^-1 B'.
  Eigen::MatrixXd cols(n_, 2);
  cols.col(0) = sigma_inv_.col(i);
  cols.col(1) = m.w;
  const double detk = m.k11 * m.k22 - m.k12 * m.k12;  // = -((1+q)^2 - p s)
  Eigen::Matrix2d kinv;
  kinv << m.k22, -m.k12, -m.k12, m.k11;
  kinv /= detk;
  sigma_inv_.noalias() -= cols * kinv * cols.transpose();
  sigma_inv_ = 0.5 * (sigma_inv_ + sigma_inv_.transpose()).eval();
  sigma_.col(i) += m.u;
  sigma_.row(i) += m.u.transpose();
  logdet_ = m.new_logdet;
  sigma_inv_r_.noalias() = sigma_inv_ * r_;
  quad_ = r_.dot(sigma_inv_r_);
}

}  // namespace lpjmm
