#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "lpjmm/gp_cache.hpp"
#include "lpjmm/rng.hpp"
#include "lpjmm/types.hpp"

namespace lpjmm {

struct ChainConfig {
  long n_adapt = 20000;
  long n_burn = 20000;
  long n_keep = 10000;
  int thin = 1;
  std::uint64_t seed = 1;

  // initial random-walk scales per block
  double step_z = 0.5;
  double step_theta = 0.5;
  double step_sigma2 = 0.5;
  double step_tau2 = 0.5;
  double step_phi = 0.1;

  // adaptation steers each block's acceptance rate toward the band midpoint
  double accept_low = 0.2;
  double accept_high = 0.5;

  long checkpoint_every = 0;  // sweeps between checkpoints; 0 disables
  std::string checkpoint_path;

  bool store_pointwise = false;  // per-cell log-likelihoods for WAIC

  // validation switches: turning a tier off makes the blocks target the prior
  bool use_edge_data = true;
  bool use_attribute_data = true;
  bool audit_fastpath = false;  // check z fast-path deltas against full recomputes

  void validate() const;
};

std::uint64_t data_fingerprint(const MultiLayerNetwork& net, const AttributeVector& x,
                               const Hyperparameters& hp);

struct BlockRates {
  double z = 0, sigma2 = 0, tau2 = 0, phi = 0;
  std::vector<double> theta;
};

struct ChainMeta {
  std::uint64_t data_fingerprint = 0;
  int n_actors = 0, n_layers = 0, K = 0, H = 0;
  ChainConfig config;
  BlockRates final_steps;     // frozen random-walk scales
  BlockRates accept_rates;    // post-adaptation acceptance rates
};

struct PosteriorChain {
  std::vector<ModelState> draws;
  std::vector<double> loglik;  // observed-data log-likelihood (edge + attribute tiers)
  Eigen::MatrixXd pointwise;   // stored draws x observed cells, empty unless enabled
  ChainMeta meta;

  std::size_t size() const { return draws.size(); }
};

struct Checkpoint {
  std::uint64_t fingerprint = 0;
  std::uint64_t config_hash = 0;
  long sweep_index = 0;  // completed sweeps
  ModelState state;
  std::string rng_state;
  double log_step_z = 0, log_step_sigma2 = 0, log_step_tau2 = 0, log_step_phi = 0;
  std::vector<double> log_step_theta;
  long adapt_iter = 0;
  std::vector<double> accept_sums;  // telemetry accumulators, fixed layout
  std::vector<long> accept_counts;
  std::vector<ModelState> draws;
  std::vector<double> loglik;
  std::vector<std::vector<double>> pointwise;
};

void save_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::string& path);

// Metropolis-within-Gibbs engine. One sweep applies, in fixed order:
// impute_missing_edges, update_augmentation, update_ab, update_theta,
// update_z, update_gp_params, update_mixture. RNG consumption order is fixed
// per block (documented at each block), so identical inputs + seed + config
// give bit-identical chains, including across checkpoint/resume.
class Sampler {
 public:
  Sampler(MultiLayerNetwork net, AttributeVector x, Hyperparameters hp, ChainConfig cfg);

  PosteriorChain run();
  PosteriorChain run(const Checkpoint& resume);

  void sweep();
  void impute_missing_edges();
  void update_augmentation();
  void update_ab();
  void update_theta();
  void update_z();
  void update_gp_params();
  void update_mixture();

  const ModelState& state() const { return state_; }
  void set_state(const ModelState& s);
  Rng& rng() { return rng_; }

  // Swap in new data of identical shape (keeps parameter state); used by
  // joint-distribution validation loops.
  void replace_data(MultiLayerNetwork net, AttributeVector x);

  const MultiLayerNetwork& network() const { return net_; }
  const AttributeVector& attribute() const { return x_; }
  std::uint64_t fingerprint() const { return fingerprint_; }

  double observed_data_loglik() const;
  double ystar(int layer, std::int64_t pair) const { return ystar_[layer][pair]; }
  std::int8_t completed_cell(int layer, std::int64_t pair) const { return ycomp_[layer][pair]; }
  double audit_max_discrepancy() const { return audit_max_; }
  BlockRates current_steps() const;
  BlockRates acceptance_rates() const;

 private:
  void init_state();
  void refresh_caches();
  void adapt_steps();
  void record_rates();
  void store_draw(PosteriorChain& chain);
  void flush_pointwise(PosteriorChain& chain) const;
  void emit_checkpoint(const PosteriorChain& chain) const;
  Checkpoint make_checkpoint(const PosteriorChain& chain) const;
  void restore_checkpoint(const Checkpoint& ck, PosteriorChain& chain);
  PosteriorChain run_schedule(PosteriorChain chain, long start_sweep);
  std::vector<double> pointwise_row() const;
  double actor_edge_loglik(int i, const Eigen::VectorXd& dists_i) const;

  MultiLayerNetwork net_;
  AttributeVector x_;
  Hyperparameters hp_;
  ChainConfig cfg_;
  Rng rng_;
  std::uint64_t fingerprint_ = 0;

  ModelState state_;
  std::vector<double> absdx_;                   // |x_i - x_j| per pair
  Eigen::MatrixXd dist_;                        // latent distance matrix
  std::vector<std::vector<std::int8_t>> ycomp_; // observed cells + this sweep's imputations
  std::vector<std::vector<double>> ystar_;      // augmentation variables (NaN = absent)
  GpCache gp_;

  // adaptation
  bool adapting_ = false;
  long adapt_iter_ = 0;
  double log_step_z_ = 0, log_step_s2_ = 0, log_step_t2_ = 0, log_step_phi_ = 0;
  std::vector<double> log_step_theta_;
  // sweep-local mean acceptance probabilities
  double sw_acc_z_ = 0, sw_acc_s2_ = 0, sw_acc_t2_ = 0, sw_acc_phi_ = 0;
  std::vector<double> sw_acc_theta_;
  // post-adaptation telemetry
  std::vector<double> acc_sums_;
  std::vector<long> acc_counts_;

  long sweep_index_ = 0;
  double audit_max_ = 0.0;
  std::vector<std::vector<double>> pw_rows_;  // pointwise log-likelihood rows
};

// One full chain with the standard schedule; convenience wrapper.
PosteriorChain run_chain(const MultiLayerNetwork& net, const AttributeVector& x,
                         const Hyperparameters& hp, const ChainConfig& cfg);

}  // namespace lpjmm
