#include "lpjmm/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "lpjmm/model.hpp"
#include "lpjmm/parallel.hpp"
#include "lpjmm/special.hpp"

namespace lpjmm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t k = 0; k < len; ++k) {
    h ^= p[k];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a_double(std::uint64_t h, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  return fnv1a(h, &bits, sizeof bits);
}

std::uint64_t fnv1a_i64(std::uint64_t h, std::int64_t v) { return fnv1a(h, &v, sizeof v); }

// Fold a real-line proposal back into [lo, hi] by reflection at both ends.
double reflect_into(double v, double lo, double hi) {
  const double width = hi - lo;
  double t = std::fmod(v - lo, 2.0 * width);
  if (t < 0.0) t += 2.0 * width;
  return t <= width ? lo + t : hi - (t - width);
}

// (log|Sigma|, r' Sigma^-1 r) for a candidate covariance; nullopt if the
// factorization breaks down (candidate is then rejected).
struct CholStats {
  bool ok = false;
  double logdet = 0.0, quad = 0.0;
};

CholStats chol_stats(const Eigen::MatrixXd& z, double phi, double sigma2, double tau2,
                     const Eigen::VectorXd& x, double beta) {
  CholStats out;
  Eigen::MatrixXd chol = gp_covariance(z, phi, sigma2, tau2);
  if (cholesky_in_place(chol) >= 0) return out;
  const int n = static_cast<int>(z.rows());
  for (int i = 0; i < n; ++i) out.logdet += 2.0 * std::log(chol(i, i));
  const Eigen::VectorXd r = x.array() - beta;
  out.quad = chol.triangularView<Eigen::Lower>().solve(r).squaredNorm();
  out.ok = true;
  return out;
}

}  // namespace

void ChainConfig::validate() const {
  if (n_adapt < 0 || n_burn < 0 || n_keep < 0) throw std::invalid_argument("iteration counts must be >= 0");
  if (thin < 1) throw std::invalid_argument("thin must be >= 1");
  if (!(0.0 < accept_low && accept_low < accept_high && accept_high < 1.0))
    throw std::invalid_argument("acceptance band must satisfy 0 < low < high < 1");
  if (step_z < 0 || step_theta < 0 || step_sigma2 < 0 || step_tau2 < 0 || step_phi < 0)
    throw std::invalid_argument("step sizes must be nonnegative");
  if (checkpoint_every < 0) throw std::invalid_argument("checkpoint_every must be >= 0");
  if (checkpoint_every > 0 && checkpoint_path.empty())
    throw std::invalid_argument("checkpoint_every set but checkpoint_path empty");
}

std::uint64_t data_fingerprint(const MultiLayerNetwork& net, const AttributeVector& x,
                               const Hyperparameters& hp) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  h = fnv1a(h, "lpjmm.v1", 8);
  h = fnv1a_i64(h, net.n_actors());
  h = fnv1a_i64(h, net.n_layers());
  for (int l = 0; l < net.n_layers(); ++l)
    for (std::int64_t p = 0; p < net.n_pairs(); ++p) {
      const std::int8_t v = net.cell_at(l, p);
      h = fnv1a(h, &v, 1);
    }
  for (int i = 0; i < x.size(); ++i) h = fnv1a_double(h, x.values[i]);
  h = fnv1a_i64(h, hp.K);
  h = fnv1a_i64(h, hp.H);
  for (double v : {hp.m_a, hp.nu_a2, hp.m_b, hp.nu_b2, hp.lambda1, hp.lambda2, hp.nu_beta2,
                   hp.eta1, hp.eta2, hp.xi1, hp.xi2, hp.u1, hp.u2, hp.nu_mu2, hp.gamma1,
                   hp.gamma2})
    h = fnv1a_double(h, v);
  for (int i = 0; i < hp.alpha.size(); ++i) h = fnv1a_double(h, hp.alpha[i]);
  for (int i = 0; i < hp.m_mu.size(); ++i) h = fnv1a_double(h, hp.m_mu[i]);
  return h;
}

Sampler::Sampler(MultiLayerNetwork net, AttributeVector x, Hyperparameters hp, ChainConfig cfg)
    : net_(std::move(net)), x_(std::move(x)), hp_(std::move(hp)), cfg_(std::move(cfg)),
      rng_(cfg_.seed) {
  cfg_.validate();
  hp_.validate();
  x_.validate();
  if (net_.n_actors() != x_.size())
    throw std::invalid_argument("network and attribute sizes differ");
  fingerprint_ = data_fingerprint(net_, x_, hp_);

  const int L = net_.n_layers();
  // log(0) = -inf encodes a zero-width proposal: the walk stays put exactly
  log_step_z_ = std::log(cfg_.step_z);
  log_step_s2_ = std::log(cfg_.step_sigma2);
  log_step_t2_ = std::log(cfg_.step_tau2);
  log_step_phi_ = std::log(cfg_.step_phi);
  log_step_theta_.assign(L, std::log(cfg_.step_theta));
  sw_acc_theta_.assign(L, 0.0);
  acc_sums_.assign(4 + L, 0.0);
  acc_counts_.assign(4 + L, 0);

  init_state();
  refresh_caches();
}

// Initialization, in RNG order: omega ~ Dir(alpha); g_i ~ omega; mu_h, kappa2_h
// from their priors; z_i from the mixture given g; a_l, b_l from their priors.
// Deterministic starts: theta = 1, beta = mean(x), sigma2 = tau2 = half the
// sample variance of x, phi = (u1 + u2) / 2.
void Sampler::init_state() {
  const int n = net_.n_actors();
  const int L = net_.n_layers();
  const int K = hp_.K;
  const int H = hp_.H;

  state_.omega = rng_.dirichlet(hp_.alpha);
  state_.g.resize(n);
  std::vector<double> logw(H);
  for (int i = 0; i < n; ++i) {
    for (int h = 0; h < H; ++h) logw[h] = std::log(state_.omega[h]);
    state_.g[i] = 1 + rng_.categorical_from_log(logw);
  }
  state_.mu.resize(H, K);
  state_.kappa2.resize(H);
  for (int h = 0; h < H; ++h) {
    for (int k = 0; k < K; ++k) state_.mu(h, k) = rng_.normal(hp_.m_mu[k], std::sqrt(hp_.nu_mu2));
    state_.kappa2[h] = rng_.inv_gamma(hp_.gamma1, hp_.gamma2);
  }
  state_.z.resize(n, K);
  for (int i = 0; i < n; ++i) {
    const int h = state_.g[i] - 1;
    const double sd = std::sqrt(state_.kappa2[h]);
    for (int k = 0; k < K; ++k) state_.z(i, k) = rng_.normal(state_.mu(h, k), sd);
  }
  state_.a.resize(L);
  state_.b.resize(L);
  state_.theta = Eigen::VectorXd::Ones(L);
  for (int l = 0; l < L; ++l) {
    state_.a[l] = rng_.normal(hp_.m_a, std::sqrt(hp_.nu_a2));
    state_.b[l] = rng_.normal(hp_.m_b, std::sqrt(hp_.nu_b2));
  }
  state_.beta = x_.values.mean();
  const double xvar =
      n > 1 ? (x_.values.array() - x_.values.mean()).square().sum() / (n - 1) : 1.0;
  state_.sigma2 = state_.tau2 = std::max(0.5 * xvar, 1e-3);
  state_.phi = 0.5 * (hp_.u1 + hp_.u2);
}

void Sampler::refresh_caches() {
  const int n = net_.n_actors();
  const auto& pairs = net_.pairs();
  absdx_.resize(pairs.size());
  for (std::size_t p = 0; p < pairs.size(); ++p)
    absdx_[p] = std::abs(x_.values[pairs[p].first] - x_.values[pairs[p].second]);
  dist_.resize(n, n);
  for (int i = 0; i < n; ++i) {
    dist_(i, i) = 0.0;
    for (int j = i + 1; j < n; ++j) {
      const double d = (state_.z.row(i) - state_.z.row(j)).norm();
      dist_(i, j) = d;
      dist_(j, i) = d;
    }
  }
  ycomp_.assign(net_.n_layers(), {});
  ystar_.assign(net_.n_layers(), {});
  for (int l = 0; l < net_.n_layers(); ++l) {
    ycomp_[l].resize(pairs.size());
    for (std::int64_t p = 0; p < net_.n_pairs(); ++p) ycomp_[l][p] = net_.cell_at(l, p);
    ystar_[l].assign(pairs.size(), kNaN);
  }
  gp_.rebuild(state_.z, state_.phi, state_.sigma2, state_.tau2, x_.values, state_.beta);
}

void Sampler::set_state(const ModelState& s) {
  s.validate(hp_);
  if (s.n_actors() != net_.n_actors() || s.n_layers() != net_.n_layers())
    throw std::invalid_argument("set_state: shape mismatch");
  state_ = s;
  refresh_caches();
}

void Sampler::replace_data(MultiLayerNetwork net, AttributeVector x) {
  if (net.n_actors() != net_.n_actors() || net.n_layers() != net_.n_layers() ||
      x.size() != x_.size())
    throw std::invalid_argument("replace_data: shape mismatch");
  x.validate();
  net_ = std::move(net);
  x_ = std::move(x);
  fingerprint_ = data_fingerprint(net_, x_, hp_);
  const auto& pairs = net_.pairs();
  for (std::size_t p = 0; p < pairs.size(); ++p)
    absdx_[p] = std::abs(x_.values[pairs[p].first] - x_.values[pairs[p].second]);
  for (int l = 0; l < net_.n_layers(); ++l) {
    for (std::int64_t p = 0; p < net_.n_pairs(); ++p) ycomp_[l][p] = net_.cell_at(l, p);
    std::fill(ystar_[l].begin(), ystar_[l].end(), kNaN);
  }
  gp_.set_mean(x_.values, state_.beta);
}

double Sampler::observed_data_loglik() const {
  double total = 0.0;
  if (cfg_.use_edge_data) total += edge_loglik(net_, state_, x_);
  if (cfg_.use_attribute_data) total += gp_.attr_loglik();
  return total;
}

// Missing cells are redrawn Bernoulli(Phi(eta)) at the current state. The
// original mask in net_ is never touched; imputations live in ycomp_ and feed
// only this sweep's augmented likelihood. RNG: one uniform per missing cell,
// (layer, pair) order.
void Sampler::impute_missing_edges() {
  if (!cfg_.use_edge_data) return;
  const auto& pairs = net_.pairs();
  for (int l = 0; l < net_.n_layers(); ++l) {
    for (std::int64_t p = 0; p < net_.n_pairs(); ++p) {
      if (net_.cell_at(l, p) != MultiLayerNetwork::kMissing) continue;
      const auto [i, j] = pairs[static_cast<std::size_t>(p)];
      const double eta = state_.a[l] + state_.b[l] * absdx_[p] - state_.theta[l] * dist_(i, j);
      ycomp_[l][p] = rng_.bernoulli(normal_cdf(eta)) ? 1 : 0;
    }
  }
}

// ystar ~ N(eta, 1) truncated to the side dictated by the completed cell.
// Cells that are neither observed nor imputed keep no entry. RNG: one
// truncated draw per completed cell, (layer, pair) order.
void Sampler::update_augmentation() {
  if (!cfg_.use_edge_data) return;
  const auto& pairs = net_.pairs();
  for (int l = 0; l < net_.n_layers(); ++l) {
    for (std::int64_t p = 0; p < net_.n_pairs(); ++p) {
      const std::int8_t y = ycomp_[l][p];
      if (y == MultiLayerNetwork::kMissing) {
        ystar_[l][p] = kNaN;
        continue;
      }
      const auto [i, j] = pairs[static_cast<std::size_t>(p)];
      const double eta = state_.a[l] + state_.b[l] * absdx_[p] - state_.theta[l] * dist_(i, j);
      ystar_[l][p] = y == 1 ? rng_.trunc_normal_positive(eta) : rng_.trunc_normal_nonpositive(eta);
    }
  }
}

// Joint bivariate normal Gibbs draw of (a_l, b_l) from the augmented linear
// model ystar + theta_l d = a_l + b_l |dx| + eps. With no augmented cells the
// draw reduces to the prior. RNG: two normals per layer.
void Sampler::update_ab() {
  const auto& pairs = net_.pairs();
  for (int l = 0; l < net_.n_layers(); ++l) {
    double n_cells = 0, sv = 0, svv = 0, st = 0, stv = 0;
    for (std::int64_t p = 0; p < net_.n_pairs(); ++p) {
      const double ys = ystar_[l][p];
      if (std::isnan(ys)) continue;
      const auto [i, j] = pairs[static_cast<std::size_t>(p)];
      const double v = absdx_[p];
      const double t = ys + state_.theta[l] * dist_(i, j);
      n_cells += 1.0;
      sv += v;
      svv += v * v;
      st += t;
      stv += t * v;
    }
    const double p11 = n_cells + 1.0 / hp_.nu_a2;
    const double p12 = sv;
    const double p22 = svv + 1.0 / hp_.nu_b2;
    const double h1 = st + hp_.m_a / hp_.nu_a2;
    const double h2 = stv + hp_.m_b / hp_.nu_b2;
    // 2x2 Cholesky of the precision: P = L L'
    const double l11 = std::sqrt(p11);
    const double l21 = p12 / l11;
    const double arg = p22 - l21 * l21;
    if (!(arg > 0.0)) throw numerical_error("update_ab: singular precision");
    const double l22 = std::sqrt(arg);
    // mean = P^-1 h via forward/back substitution
    const double w1 = h1 / l11;
    const double w2 = (h2 - l21 * w1) / l22;
    const double mean_b = w2 / l22;
    const double mean_a = (w1 - l21 * mean_b) / l11;
    // draw = mean + L^-T eps
    const double e1 = rng_.normal();
    const double e2 = rng_.normal();
    const double db = e2 / l22;
    const double da = (e1 - l21 * db) / l11;
    state_.a[l] = mean_a + da;
    state_.b[l] = mean_b + db;
  }
}

// Log-scale random walk per layer against the augmented conditional
// exp(-(theta^2 Sdd + 2 theta Sed)/2) * Gamma(lambda1, lambda2), Jacobian
// included. RNG: one normal + one uniform per layer.
void Sampler::update_theta() {
  const auto& pairs = net_.pairs();
  for (int l = 0; l < net_.n_layers(); ++l) {
    double sdd = 0, sed = 0;
    for (std::int64_t p = 0; p < net_.n_pairs(); ++p) {
      const double ys = ystar_[l][p];
      if (std::isnan(ys)) continue;
      const auto [i, j] = pairs[static_cast<std::size_t>(p)];
      const double d = dist_(i, j);
      const double e = ys - state_.a[l] - state_.b[l] * absdx_[p];
      sdd += d * d;
      sed += e * d;
    }
    const auto logtarget = [&](double t) {
      return -0.5 * t * t * sdd - t * sed + hp_.lambda1 * std::log(t) - hp_.lambda2 * t;
    };
    const double step = std::exp(log_step_theta_[l]);
    const double cur = state_.theta[l];
    const double cand = cur * std::exp(step * rng_.normal());
    const double diff = logtarget(cand) - logtarget(cur);
    sw_acc_theta_[l] = std::min(1.0, std::exp(diff));
    if (std::log(rng_.uniform()) < diff) state_.theta[l] = cand;
  }
}

double Sampler::actor_edge_loglik(int i, const Eigen::VectorXd& dists_i) const {
  const int n = net_.n_actors();
  const int L = net_.n_layers();
  return blocked_sum(n, [&](std::int64_t j64) {
    const int j = static_cast<int>(j64);
    if (j == i) return 0.0;
    const std::int64_t p = pair_index(n, std::min(i, j), std::max(i, j));
    double s = 0.0;
    for (int l = 0; l < L; ++l) {
      const std::int8_t y = net_.cell_at(l, p);
      if (y == MultiLayerNetwork::kMissing) continue;
      const double eta = state_.a[l] + state_.b[l] * absdx_[p] - state_.theta[l] * dists_i[j];
      s += y == 1 ? log_normal_cdf(eta) : log_normal_cdf(-eta);
    }
    return s;
  });
}

// Per-actor random-walk MH on z_i. The conditional combines the observed edge
// terms touching i, the attribute tier (rank-2 factorization update through
// GpCache), and the mixture term. RNG: K normals + one uniform per actor.
void Sampler::update_z() {
  const int n = net_.n_actors();
  const int K = hp_.K;
  const double step = std::exp(log_step_z_);
  double acc = 0.0;
  Eigen::VectorXd cand(K), cand_dists(n), new_row(n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < K; ++k) cand[k] = state_.z(i, k) + step * rng_.normal();

    for (int j = 0; j < n; ++j)
      cand_dists[j] = j == i ? 0.0 : (cand.transpose() - state_.z.row(j)).norm();

    const int h = state_.g[i] - 1;
    const double kap2 = state_.kappa2[h];
    const double dmix = -0.5 *
        ((cand.transpose() - state_.mu.row(h)).squaredNorm() -
         (state_.z.row(i) - state_.mu.row(h)).squaredNorm()) / kap2;

    double dedge = 0.0;
    if (cfg_.use_edge_data)
      dedge = actor_edge_loglik(i, cand_dists) - actor_edge_loglik(i, dist_.row(i));

    double dattr = 0.0;
    GpCache::RowMove move;
    bool move_usable = false;
    if (cfg_.use_attribute_data) {
      for (int j = 0; j < n; ++j)
        new_row[j] = j == i ? gp_.sigma()(i, i)
                            : state_.sigma2 * std::exp(-state_.phi * cand_dists[j]);
      move = gp_.eval_row_move(i, new_row);
      if (move.valid) {
        dattr = -0.5 * ((move.new_logdet - gp_.logdet()) + (move.new_quad - gp_.quad()));
        move_usable = true;
      } else {
        // full recompute fallback
        Eigen::MatrixXd zc = state_.z;
        zc.row(i) = cand.transpose();
        const CholStats cs =
            chol_stats(zc, state_.phi, state_.sigma2, state_.tau2, x_.values, state_.beta);
        if (!cs.ok) throw numerical_error("update_z: candidate covariance not positive definite");
        dattr = -0.5 * ((cs.logdet - gp_.logdet()) + (cs.quad - gp_.quad()));
      }
    }

    const double diff = dmix + dedge + dattr;

    if (cfg_.audit_fastpath) {
      ModelState cs = state_;
      cs.z.row(i) = cand.transpose();
      const double full =
          log_posterior(cs, net_, x_, hp_) - log_posterior(state_, net_, x_, hp_);
      double fast = dmix + dattr;
      if (cfg_.use_edge_data) fast += dedge;
      else fast += edge_loglik(net_, cs, x_) - edge_loglik(net_, state_, x_);
      if (!cfg_.use_attribute_data) fast += attr_logdensity(x_, cs) - attr_logdensity(x_, state_);
      audit_max_ = std::max(audit_max_, std::abs(full - fast));
    }

    acc += std::min(1.0, std::exp(diff));
    if (std::log(rng_.uniform()) < diff) {
      state_.z.row(i) = cand.transpose();
      dist_.row(i) = cand_dists.transpose();
      dist_.col(i) = cand_dists;
      if (cfg_.use_attribute_data) {
        if (move_usable) {
          gp_.apply_row_move(move);
        } else {
          gp_.rebuild(state_.z, state_.phi, state_.sigma2, state_.tau2, x_.values, state_.beta);
        }
      }
    }
  }
  sw_acc_z_ = acc / n;
}

// beta: exact conjugate normal given Sigma. sigma2, tau2: log-scale random
// walks with a fresh factorization per proposal. phi: random walk reflected
// into [u1, u2]. RNG: one normal for beta, then one normal + one uniform for
// each of sigma2, tau2, phi.
void Sampler::update_gp_params() {
  bool cov_changed = false;

  if (cfg_.use_attribute_data) {
    const auto [s11, s1x] = gp_.ones_products(x_.values);
    const double prec = s11 + 1.0 / hp_.nu_beta2;
    const double mean = s1x / prec;
    state_.beta = mean + rng_.normal() / std::sqrt(prec);
    gp_.set_mean(x_.values, state_.beta);
  } else {
    state_.beta = rng_.normal(0.0, std::sqrt(hp_.nu_beta2));
  }

  const auto attr_part = [&](const CholStats& cs) { return -0.5 * (cs.logdet + cs.quad); };

  {  // sigma2: multiplicative walk (log-scale RW), InvGamma(eta1, eta2) prior
    const double eps = std::exp(log_step_s2_) * rng_.normal();
    const double cand = state_.sigma2 * std::exp(eps);
    double diff = -hp_.eta1 * eps - hp_.eta2 * (1.0 / cand - 1.0 / state_.sigma2);
    if (cfg_.use_attribute_data) {
      const CholStats cs =
          chol_stats(state_.z, state_.phi, cand, state_.tau2, x_.values, state_.beta);
      diff = !cs.ok ? -std::numeric_limits<double>::infinity()
                    : diff + attr_part(cs) + 0.5 * (gp_.logdet() + gp_.quad());
    }
    sw_acc_s2_ = std::min(1.0, std::exp(diff));
    if (std::log(rng_.uniform()) < diff) {
      state_.sigma2 = cand;
      cov_changed = true;
      if (cfg_.use_attribute_data)
        gp_.rebuild(state_.z, state_.phi, state_.sigma2, state_.tau2, x_.values, state_.beta);
    }
  }

  {  // tau2: multiplicative walk, InvGamma(xi1, xi2) prior
    const double eps = std::exp(log_step_t2_) * rng_.normal();
    const double cand = state_.tau2 * std::exp(eps);
    double diff = -hp_.xi1 * eps - hp_.xi2 * (1.0 / cand - 1.0 / state_.tau2);
    if (cfg_.use_attribute_data) {
      const CholStats cs =
          chol_stats(state_.z, state_.phi, state_.sigma2, cand, x_.values, state_.beta);
      diff = !cs.ok ? -std::numeric_limits<double>::infinity()
                    : diff + attr_part(cs) + 0.5 * (gp_.logdet() + gp_.quad());
    }
    sw_acc_t2_ = std::min(1.0, std::exp(diff));
    if (std::log(rng_.uniform()) < diff) {
      state_.tau2 = cand;
      cov_changed = true;
      if (cfg_.use_attribute_data)
        gp_.rebuild(state_.z, state_.phi, state_.sigma2, state_.tau2, x_.values, state_.beta);
    }
  }

  {  // phi, reflected walk on [u1, u2], uniform prior
    const double eps = std::exp(log_step_phi_) * rng_.normal();
    const double cand = eps == 0.0 ? state_.phi : reflect_into(state_.phi + eps, hp_.u1, hp_.u2);
    double diff = 0.0;
    if (cfg_.use_attribute_data) {
      const CholStats cs =
          chol_stats(state_.z, cand, state_.sigma2, state_.tau2, x_.values, state_.beta);
      diff = !cs.ok ? -std::numeric_limits<double>::infinity()
                    : attr_part(cs) + 0.5 * (gp_.logdet() + gp_.quad());
    }
    sw_acc_phi_ = std::min(1.0, std::exp(diff));
    if (std::log(rng_.uniform()) < diff) {
      state_.phi = cand;
      cov_changed = true;
      if (cfg_.use_attribute_data)
        gp_.rebuild(state_.z, state_.phi, state_.sigma2, state_.tau2, x_.values, state_.beta);
    }
  }

  (void)cov_changed;
}

// Exact conjugate draws for g, omega, mu, kappa2 in that order. Components
// with no members reduce to prior draws. RNG: one uniform per actor for g,
// H gammas for omega, H*K normals for mu, H inverse-gammas for kappa2.
void Sampler::update_mixture() {
  const int n = net_.n_actors();
  const int H = hp_.H;
  const int K = hp_.K;

  std::vector<double> logw(H);
  for (int i = 0; i < n; ++i) {
    for (int h = 0; h < H; ++h) {
      const double kap2 = state_.kappa2[h];
      logw[h] = std::log(state_.omega[h]) - 0.5 * K * std::log(kap2) -
                0.5 * (state_.z.row(i) - state_.mu.row(h)).squaredNorm() / kap2;
    }
    state_.g[i] = 1 + rng_.categorical_from_log(logw);
  }

  Eigen::VectorXd counts = Eigen::VectorXd::Zero(H);
  for (int i = 0; i < n; ++i) counts[state_.g[i] - 1] += 1.0;
  state_.omega = rng_.dirichlet(hp_.alpha + counts);

  for (int h = 0; h < H; ++h) {
    Eigen::VectorXd zsum = Eigen::VectorXd::Zero(K);
    for (int i = 0; i < n; ++i)
      if (state_.g[i] == h + 1) zsum += state_.z.row(i).transpose();
    const double prec = 1.0 / hp_.nu_mu2 + counts[h] / state_.kappa2[h];
    const double sd = 1.0 / std::sqrt(prec);
    for (int k = 0; k < K; ++k) {
      const double mean = (hp_.m_mu[k] / hp_.nu_mu2 + zsum[k] / state_.kappa2[h]) / prec;
      state_.mu(h, k) = rng_.normal(mean, sd);
    }
  }

  for (int h = 0; h < H; ++h) {
    double ssq = 0.0;
    for (int i = 0; i < n; ++i)
      if (state_.g[i] == h + 1) ssq += (state_.z.row(i) - state_.mu.row(h)).squaredNorm();
    state_.kappa2[h] = rng_.inv_gamma(hp_.gamma1 + counts[h] * K / 2.0, hp_.gamma2 + 0.5 * ssq);
  }
}

void Sampler::sweep() {
  // full refactorization once per sweep bounds rank-2 update drift
  if (cfg_.use_attribute_data)
    gp_.rebuild(state_.z, state_.phi, state_.sigma2, state_.tau2, x_.values, state_.beta);

  impute_missing_edges();
  update_augmentation();
  update_ab();
  update_theta();
  update_z();
  update_gp_params();
  update_mixture();

  if (adapting_) {
    adapt_steps();
  } else {
    record_rates();
  }
  ++sweep_index_;
}

// Robbins-Monro on the log step sizes toward the band midpoint; frozen once
// adaptation ends so the kept chain is a fixed Markov kernel.
void Sampler::adapt_steps() {
  const double target = 0.5 * (cfg_.accept_low + cfg_.accept_high);
  const double gain = 1.0 / std::pow(static_cast<double>(adapt_iter_ + 1), 0.6);
  const auto nudge = [&](double& ls, double rate) {
    ls = std::clamp(ls + gain * (rate - target), std::log(1e-5), std::log(1e3));
  };
  nudge(log_step_z_, sw_acc_z_);
  nudge(log_step_s2_, sw_acc_s2_);
  nudge(log_step_t2_, sw_acc_t2_);
  nudge(log_step_phi_, sw_acc_phi_);
  for (std::size_t l = 0; l < log_step_theta_.size(); ++l)
    nudge(log_step_theta_[l], sw_acc_theta_[l]);
  ++adapt_iter_;
}

void Sampler::record_rates() {
  const auto add = [&](int slot, double rate) {
    acc_sums_[slot] += rate;
    acc_counts_[slot] += 1;
  };
  add(0, sw_acc_z_);
  add(1, sw_acc_s2_);
  add(2, sw_acc_t2_);
  add(3, sw_acc_phi_);
  for (int l = 0; l < net_.n_layers(); ++l) add(4 + l, sw_acc_theta_[l]);
}

BlockRates Sampler::current_steps() const {
  BlockRates s;
  s.z = std::exp(log_step_z_);
  s.sigma2 = std::exp(log_step_s2_);
  s.tau2 = std::exp(log_step_t2_);
  s.phi = std::exp(log_step_phi_);
  for (double ls : log_step_theta_) s.theta.push_back(std::exp(ls));
  return s;
}

BlockRates Sampler::acceptance_rates() const {
  BlockRates r;
  const auto rate = [&](int slot) {
    return acc_counts_[slot] > 0 ? acc_sums_[slot] / acc_counts_[slot] : 0.0;
  };
  r.z = rate(0);
  r.sigma2 = rate(1);
  r.tau2 = rate(2);
  r.phi = rate(3);
  for (int l = 0; l < net_.n_layers(); ++l) r.theta.push_back(rate(4 + l));
  return r;
}

std::vector<double> Sampler::pointwise_row() const {
  std::vector<double> row;
  const auto& pairs = net_.pairs();
  for (int l = 0; l < net_.n_layers(); ++l) {
    for (std::int64_t p = 0; p < net_.n_pairs(); ++p) {
      const std::int8_t y = net_.cell_at(l, p);
      if (y == MultiLayerNetwork::kMissing) continue;
      const auto [i, j] = pairs[static_cast<std::size_t>(p)];
      const double eta = state_.a[l] + state_.b[l] * absdx_[p] - state_.theta[l] * dist_(i, j);
      row.push_back(y == 1 ? log_normal_cdf(eta) : log_normal_cdf(-eta));
    }
  }
  return row;
}

void Sampler::store_draw(PosteriorChain& chain) {
  chain.draws.push_back(state_);
  chain.loglik.push_back(observed_data_loglik());
  if (cfg_.store_pointwise) pw_rows_.push_back(pointwise_row());
}

void Sampler::flush_pointwise(PosteriorChain& chain) const {
  if (pw_rows_.empty()) return;
  chain.pointwise.resize(static_cast<Eigen::Index>(pw_rows_.size()),
                         static_cast<Eigen::Index>(pw_rows_.front().size()));
  for (std::size_t r = 0; r < pw_rows_.size(); ++r)
    for (std::size_t c = 0; c < pw_rows_[r].size(); ++c)
      chain.pointwise(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          pw_rows_[r][c];
}

Checkpoint Sampler::make_checkpoint(const PosteriorChain& chain) const {
  Checkpoint ck;
  ck.fingerprint = fingerprint_;
  ck.config_hash = 0;  // filled by save path
  ck.sweep_index = sweep_index_;
  ck.state = state_;
  ck.rng_state = rng_.state_string();
  ck.log_step_z = log_step_z_;
  ck.log_step_sigma2 = log_step_s2_;
  ck.log_step_tau2 = log_step_t2_;
  ck.log_step_phi = log_step_phi_;
  ck.log_step_theta = log_step_theta_;
  ck.adapt_iter = adapt_iter_;
  ck.accept_sums = acc_sums_;
  ck.accept_counts = acc_counts_;
  ck.draws = chain.draws;
  ck.loglik = chain.loglik;
  ck.pointwise = pw_rows_;
  return ck;
}

void Sampler::restore_checkpoint(const Checkpoint& ck, PosteriorChain& chain) {
  if (ck.fingerprint != fingerprint_)
    throw std::invalid_argument("checkpoint fingerprint does not match the supplied data");
  state_ = ck.state;
  state_.validate(hp_);
  rng_.set_state_string(ck.rng_state);
  log_step_z_ = ck.log_step_z;
  log_step_s2_ = ck.log_step_sigma2;
  log_step_t2_ = ck.log_step_tau2;
  log_step_phi_ = ck.log_step_phi;
  log_step_theta_ = ck.log_step_theta;
  adapt_iter_ = ck.adapt_iter;
  acc_sums_ = ck.accept_sums;
  acc_counts_ = ck.accept_counts;
  sweep_index_ = ck.sweep_index;
  refresh_caches();
  chain.draws = ck.draws;
  chain.loglik = ck.loglik;
  pw_rows_ = ck.pointwise;
}

void Sampler::emit_checkpoint(const PosteriorChain& chain) const {
  if (cfg_.checkpoint_every <= 0 || cfg_.checkpoint_path.empty()) return;
  if (sweep_index_ == 0 || sweep_index_ % cfg_.checkpoint_every != 0) return;
  save_checkpoint(cfg_.checkpoint_path, make_checkpoint(chain));
}

PosteriorChain Sampler::run_schedule(PosteriorChain chain, long start_sweep) {
  const long total = cfg_.n_adapt + cfg_.n_burn + cfg_.n_keep;
  for (long t = start_sweep; t < total; ++t) {
    adapting_ = t < cfg_.n_adapt;
    sweep();
    if (t >= cfg_.n_adapt + cfg_.n_burn) {
      const long k = t - cfg_.n_adapt - cfg_.n_burn;
      if ((k + 1) % cfg_.thin == 0) store_draw(chain);
    }
    emit_checkpoint(chain);
  }
  chain.meta.data_fingerprint = fingerprint_;
  chain.meta.n_actors = net_.n_actors();
  chain.meta.n_layers = net_.n_layers();
  chain.meta.K = hp_.K;
  chain.meta.H = hp_.H;
  chain.meta.config = cfg_;
  chain.meta.final_steps = current_steps();
  chain.meta.accept_rates = acceptance_rates();
  flush_pointwise(chain);
  return chain;
}

PosteriorChain Sampler::run() {
  pw_rows_.clear();
  return run_schedule(PosteriorChain{}, 0);
}

PosteriorChain Sampler::run(const Checkpoint& resume) {
  PosteriorChain chain;
  restore_checkpoint(resume, chain);
  return run_schedule(std::move(chain), resume.sweep_index);
}

PosteriorChain run_chain(const MultiLayerNetwork& net, const AttributeVector& x,
                         const Hyperparameters& hp, const ChainConfig& cfg) {
  Sampler s(net, x, hp, cfg);
  return s.run();
}

}  // namespace lpjmm
