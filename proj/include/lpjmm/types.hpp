#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lpjmm {

// Numerical failure (factorization breakdown etc). `index` carries the
// offending leading minor when a Cholesky factorization fails, -1 otherwise.
struct numerical_error : std::runtime_error {
  explicit numerical_error(const std::string& what, int index = -1)
      : std::runtime_error(what), index(index) {}
  int index;
};

inline std::int64_t pair_count(int n) {
  return static_cast<std::int64_t>(n) * (n - 1) / 2;
}

// Index of unordered pair {i,j}, i < j, in row-major upper-triangular order.
inline std::int64_t pair_index(int n, int i, int j) {
  return static_cast<std::int64_t>(i) * n - static_cast<std::int64_t>(i) * (i + 1) / 2 + (j - i - 1);
}

// Symmetric binary network over a common actor set; one upper-triangular
// cell table per layer. Cell values: 0 absent, 1 present, -1 missing. The
// missing mask is explicit and never conflated with 0.
class MultiLayerNetwork {
 public:
  static constexpr std::int8_t kMissing = -1;

  MultiLayerNetwork(int n_actors, int n_layers)
      : n_(n_actors), layers_(n_layers), cells_(n_layers) {
    if (n_actors < 2) throw std::invalid_argument("network needs at least 2 actors");
    if (n_layers < 1) throw std::invalid_argument("network needs at least 1 layer");
    for (auto& c : cells_) c.assign(pair_count(n_), 0);
    pairs_.reserve(pair_count(n_));
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j) pairs_.emplace_back(i, j);
  }

  int n_actors() const { return n_; }
  int n_layers() const { return layers_; }
  std::int64_t n_pairs() const { return pair_count(n_); }

  // Unordered pairs in index order; shared by all layers.
  const std::vector<std::pair<int, int>>& pairs() const { return pairs_; }

  std::int8_t cell(int layer, int i, int j) const {
    check_pair(i, j);
    return cells_[layer][pair_index(n_, std::min(i, j), std::max(i, j))];
  }

  std::int8_t cell_at(int layer, std::int64_t pair) const { return cells_[layer][pair]; }

  void set_cell(int layer, int i, int j, std::int8_t v) {
    check_pair(i, j);
    if (v != 0 && v != 1 && v != kMissing)
      throw std::invalid_argument("cell value must be 0, 1, or missing");
    cells_[layer][pair_index(n_, std::min(i, j), std::max(i, j))] = v;
  }

  void set_cell_at(int layer, std::int64_t pair, std::int8_t v) { cells_[layer][pair] = v; }

  bool is_missing(int layer, int i, int j) const { return cell(layer, i, j) == kMissing; }

  std::int64_t n_missing(int layer) const {
    std::int64_t m = 0;
    for (auto v : cells_[layer]) m += (v == kMissing);
    return m;
  }
  std::int64_t n_observed(int layer) const { return n_pairs() - n_missing(layer); }
  std::int64_t n_edges(int layer) const {
    std::int64_t e = 0;
    for (auto v : cells_[layer]) e += (v == 1);
    return e;
  }

 private:
  void check_pair(int i, int j) const {
    if (i == j) throw std::invalid_argument("self-pairs are undefined");
    if (i < 0 || j < 0 || i >= n_ || j >= n_) throw std::invalid_argument("actor index out of range");
  }

  int n_;
  int layers_;
  std::vector<std::vector<std::int8_t>> cells_;
  std::vector<std::pair<int, int>> pairs_;
};

// One real-valued attribute per actor.
struct AttributeVector {
  Eigen::VectorXd values;

  int size() const { return static_cast<int>(values.size()); }
  void validate() const {
    if (values.size() == 0) throw std::invalid_argument("attribute vector is empty");
    if (!values.allFinite()) throw std::invalid_argument("attribute vector has non-finite entries");
  }
};

// Prior constants plus the two structural choices (latent dimension K,
// group count H). Defaults follow the reference prior setup.
struct Hyperparameters {
  int K = 2;
  int H = 5;

  double m_a = 0.0, nu_a2 = 9.0;
  double m_b = 0.0, nu_b2 = 9.0;
  double lambda1 = 1.0, lambda2 = 1.0;    // Gamma on theta_l
  double nu_beta2 = 1e4;                  // N(0, nu_beta2) on beta
  double eta1 = 2.0, eta2 = 1.0;          // InvGamma on sigma2
  double xi1 = 2.0, xi2 = 1.0;            // InvGamma on tau2
  double u1 = 0.0, u2 = 1.0;              // Uniform on phi
  Eigen::VectorXd alpha;                  // Dirichlet on omega, length H
  Eigen::VectorXd m_mu;                   // normal mean on mu_h, length K
  double nu_mu2 = 2.0 / 3.0;
  double gamma1 = 3.0, gamma2 = 2.0 / 3.0;  // InvGamma on kappa2_h

  Hyperparameters() : Hyperparameters(2, 5) {}
  Hyperparameters(int k, int h) : K(k), H(h) {
    alpha = Eigen::VectorXd::Ones(H);
    m_mu = Eigen::VectorXd::Zero(K);
  }

  void validate() const {
    if (K < 1 || H < 1) throw std::invalid_argument("K and H must be >= 1");
    if (nu_a2 <= 0 || nu_b2 <= 0 || nu_beta2 <= 0 || nu_mu2 <= 0)
      throw std::invalid_argument("prior variances must be positive");
    if (lambda1 <= 0 || lambda2 <= 0 || eta1 <= 0 || eta2 <= 0 || xi1 <= 0 || xi2 <= 0 ||
        gamma1 <= 0 || gamma2 <= 0)
      throw std::invalid_argument("prior shape/rate parameters must be positive");
    if (!(u1 < u2)) throw std::invalid_argument("phi prior requires u1 < u2");
    if (alpha.size() != H || (alpha.array() <= 0).any())
      throw std::invalid_argument("alpha must have H positive entries");
    if (m_mu.size() != K) throw std::invalid_argument("m_mu must have K entries");
  }
};

// One full point in parameter space.
struct ModelState {
  Eigen::MatrixXd z;        // N x K latent positions
  std::vector<int> g;       // group labels, 1..H
  Eigen::VectorXd a, b;     // per-layer intercept / attribute effect
  Eigen::VectorXd theta;    // per-layer latent-distance factor, > 0
  double beta = 0.0;
  double sigma2 = 1.0, tau2 = 1.0;
  double phi = 0.5;
  Eigen::VectorXd omega;    // H simplex weights
  Eigen::MatrixXd mu;       // H x K component means
  Eigen::VectorXd kappa2;   // H component variances, > 0

  int n_actors() const { return static_cast<int>(z.rows()); }
  int latent_dim() const { return static_cast<int>(z.cols()); }
  int n_layers() const { return static_cast<int>(a.size()); }
  int n_groups() const { return static_cast<int>(omega.size()); }

  // Free parameter count: NK + N + 3L + 3H + 4.
  std::int64_t dimension() const {
    return static_cast<std::int64_t>(z.size()) + n_actors() + 3 * n_layers() + 3 * n_groups() + 4;
  }

  void validate(const Hyperparameters& hp) const;
};

}  // namespace lpjmm
