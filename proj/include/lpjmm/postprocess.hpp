#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "lpjmm/sampler.hpp"
#include "lpjmm/types.hpp"

namespace lpjmm {

struct Partition {
  std::vector<int> labels;  // canonical: first occurrence order, 1..n_groups
  int n_groups = 0;
};

// Relabel to first-appearance order 1..G.
Partition canonicalize(const std::vector<int>& labels);

// Align `sample` onto `reference` over scaling, rotation, reflection and
// translation (trace objective). Reflections are allowed: the orthogonal
// factor is the full polar factor of the cross-covariance, determinant
// unconstrained.
Eigen::MatrixXd procrustes_align(const Eigen::MatrixXd& sample, const Eigen::MatrixXd& reference);

// Element-wise mean of all draws aligned to the reference.
Eigen::MatrixXd posterior_mean_positions(const std::vector<Eigen::MatrixXd>& z_draws,
                                         const Eigen::MatrixXd& reference);
Eigen::MatrixXd posterior_mean_positions(const PosteriorChain& chain,
                                         const Eigen::MatrixXd& reference);

// Co-clustering frequencies across draws; symmetric, unit diagonal.
Eigen::MatrixXd posterior_similarity(const std::vector<std::vector<int>>& g_draws);

double adjusted_rand_index(const std::vector<int>& p, const std::vector<int>& q);
inline double adjusted_rand_index(const Partition& p, const Partition& q) {
  return adjusted_rand_index(p.labels, q.labels);
}

enum class PartitionMethod { MaxPear, MinBinder, GreedyEpl };

PartitionMethod partition_method_from_string(const std::string& name);
std::string to_string(PartitionMethod m);

// Single clustering estimate from the label draws.
//  maxpear   - maximizes the PSM estimate of posterior expected adjusted Rand
//              over the sampled partitions plus average-linkage cuts of 1-PSM
//  minbinder - minimizes expected Binder loss over the same candidate set
//  greedyepl - greedy single-actor label moves on the sampled-draw estimate of
//              expected variation of information, 5 restarts, best kept
// max_groups (0 = no cap) restricts candidate group counts.
Partition point_estimate_partition(const std::vector<std::vector<int>>& g_draws,
                                   const Eigen::MatrixXd& psm, PartitionMethod method,
                                   int max_groups = 0, std::uint64_t seed = 1);

// WAIC from a draws x cells matrix of pointwise log-likelihoods:
// -2 (lppd - p_waic), lppd via log-sum-exp, p_waic the sum of per-cell
// sample variances. Requires at least 2 draws.
double waic(const Eigen::MatrixXd& pointwise_loglik);

struct ParamSummary {
  std::string name;
  double mean = 0, lower = 0, upper = 0;
};

// Posterior mean and equal-tailed interval at `level` for every scalar
// parameter plus theta ratios for all ordered layer pairs.
std::vector<ParamSummary> summarize_chain(const PosteriorChain& chain, double level);

// Equal-tailed empirical quantile (linear interpolation between order
// statistics).
double empirical_quantile(std::vector<double> values, double prob);

}  // namespace lpjmm
