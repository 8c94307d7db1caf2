#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "lpjmm/sampler.hpp"
#include "lpjmm/types.hpp"

namespace lpjmm {

// Edge count over observed unordered pairs divided by the observed pair
// count (equals edges / all pairs on complete layers).
double density(const MultiLayerNetwork& net, int layer);

// Global clustering coefficient, 3 * triangles / connected triples; 0 when no
// connected triples exist. Missing cells count as non-edges.
double transitivity(const MultiLayerNetwork& net, int layer);

// Newman's assortativity from the group mixing matrix. NaN when degenerate
// (single group or no edges).
double assortativity_categorical(const MultiLayerNetwork& net, int layer,
                                 const std::vector<int>& labels);

// Pearson correlation of endpoint attribute values over edges, both
// orientations per undirected edge. NaN when degenerate.
double assortativity_numeric(const MultiLayerNetwork& net, int layer,
                             const Eigen::VectorXd& attr);

// Generative recipe for synthetic scenarios: g ~ omega, z ~ mixture,
// x ~ N(beta 1, sigma2 M(z, phi) + tau2 I), edges ~ Bernoulli(Phi(eta)).
struct ScenarioSpec {
  int n_actors = 100;
  int n_layers = 1;
  int K = 2;
  int H = 5;
  Eigen::VectorXd omega;   // H
  Eigen::MatrixXd mu;      // H x K
  Eigen::VectorXd kappa2;  // H
  double beta = 0.0;
  double sigma2 = 1.0, tau2 = 0.3, phi = 0.5;
  Eigen::VectorXd a, b, theta;  // per layer
  std::uint64_t seed = 1;

  void validate() const;
};

struct SimulatedDataset {
  MultiLayerNetwork net;
  AttributeVector x;
  Eigen::MatrixXd z;
  std::vector<int> g;
};

SimulatedDataset simulate_dataset(const ScenarioSpec& spec);

// Five-group single-layer scenario with moderately overlapping clusters
// (density around 0.15, strong transitivity and assortative mixing).
ScenarioSpec scenario_moderate_overlap();

// Five-group single-layer scenario with well-separated clusters (density
// around 0.10, assortativity around 0.86).
ScenarioSpec scenario_well_separated();

// Append a layer with its own (a, b, theta) to an existing spec.
void add_layer(ScenarioSpec& spec, double a, double b, double theta);

// Mask exactly round(fraction * pairs) uniformly chosen unordered pairs per
// layer. Original values are recoverable from `net`; deterministic in seed.
MultiLayerNetwork apply_missingness(const MultiLayerNetwork& net, double fraction,
                                    std::uint64_t seed);

struct GofReport {
  int stride = 10;
  // [layer][replicate]
  std::vector<std::vector<double>> density, transitivity, assort_cat, assort_num;
  std::vector<double> mean_density, mean_transitivity, mean_assort_cat, mean_assort_num;
};

// Posterior-predictive replicates: every stride-th stored draw regenerates a
// complete network at that draw's parameters (z from the draw, x as given;
// optionally x regenerated from the GP tier first). Statistics are computed
// against the supplied partition and attribute. Replicates parallelize across
// draws with per-replicate RNG streams derived from seed + draw index.
GofReport gof_replicates(const PosteriorChain& chain, int n_actors, int n_layers,
                         const AttributeVector& x, const std::vector<int>& reference_partition,
                         int stride = 10, bool regenerate_attributes = false,
                         std::uint64_t seed = 1);

}  // namespace lpjmm
