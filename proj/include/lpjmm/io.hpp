#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lpjmm/netstats.hpp"
#include "lpjmm/postprocess.hpp"
#include "lpjmm/sampler.hpp"
#include "lpjmm/types.hpp"

namespace lpjmm {

struct parse_error : std::runtime_error {
  parse_error(const std::string& path, long line, long col, const std::string& what)
      : std::runtime_error(path + ":" + std::to_string(line) + ":" + std::to_string(col) +
                           ": " + what),
        path(path), line(line), col(col) {}
  std::string path;
  long line = 0, col = 0;
};

// Canonical number formatting: shortest decimal that round-trips exactly.
std::string format_double(double v);
double parse_double(const std::string& s);

// --- dataset files ---------------------------------------------------------

// N x N adjacency CSV per layer, cells in {0, 1, NA}. Diagonal cells are
// ignored (warning to stderr); either triangle may be populated, but the two
// triangles must agree wherever both are set to a non-missing value.
MultiLayerNetwork load_adjacency_layers(const std::vector<std::string>& paths);

// Edge list "i,j[,layer]" (1-based ids, header optional) plus an optional
// NA-pair list in the same format; absent pairs are 0.
MultiLayerNetwork load_edge_list(const std::string& path, int n_actors, int n_layers,
                                 const std::string& na_pairs_path = "");

// One-column CSV with a header line.
AttributeVector load_attribute_csv(const std::string& path);

void write_adjacency_csv(const std::string& path, const MultiLayerNetwork& net, int layer);
void write_attribute_csv(const std::string& path, const AttributeVector& x,
                         const std::string& name = "x");
void write_labels_csv(const std::string& path, const std::vector<int>& labels);
std::vector<int> load_labels_csv(const std::string& path);
void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m,
                      const std::string& prefix);
Eigen::MatrixXd load_matrix_csv(const std::string& path);

// --- chain files ------------------------------------------------------------

// One row per stored draw. Column order: a.l, b.l, theta.l, beta, sigma2,
// tau2, phi, omega.h, kappa2.h, mu.h.k, z.i.k, g.i, loglik.
void write_chain_csv(const std::string& path, const PosteriorChain& chain);
PosteriorChain load_chain_csv(const std::string& path);

void write_pointwise_csv(const std::string& path, const Eigen::MatrixXd& pointwise);
Eigen::MatrixXd load_pointwise_csv(const std::string& path);

// --- run configuration ------------------------------------------------------

struct PostprocessOptions {
  std::vector<std::string> methods = {"maxpear", "minbinder", "greedyepl"};
  double level = 0.95;
  int gof_stride = 10;
  int max_groups = 0;      // 0: no cap on candidate group counts
  bool gof_regenerate_attributes = false;
};

struct RunConfig {
  std::vector<std::string> layer_paths;
  std::string edge_list_path;  // alternative to layer_paths (needs n_actors/n_layers)
  int edge_list_actors = 0, edge_list_layers = 1;
  std::string na_pairs_path;
  std::string attribute_path;
  std::string true_g_path, true_z_path;  // optional ground truth
  bool standardize_x = true;
  std::string out_dir = "out";
  Hyperparameters hyper;
  ChainConfig chain;
  PostprocessOptions post;
};

// Plain-text config: "[section]" headers, "key = value" entries, '#'
// comments. Grammar documented in the README. Unknown keys are errors.
RunConfig load_config(const std::string& path);
std::uint64_t config_hash(const RunConfig& cfg);

struct DatasetBundle {
  MultiLayerNetwork net;
  AttributeVector x;
  std::optional<Eigen::MatrixXd> true_z;
  std::optional<std::vector<int>> true_g;
  std::uint64_t fingerprint = 0;
  bool standardized = false;
};

DatasetBundle load_dataset(const RunConfig& cfg);

// Center and scale to unit sample variance in place.
void standardize(AttributeVector& x);

// First principal component of a correlation PCA over P >= 2 columns; the
// component sign makes the loading on the first column positive. Returns
// (scores, explained variance ratio).
std::pair<Eigen::VectorXd, double> pca_first_component(const Eigen::MatrixXd& columns);

// --- run outputs -------------------------------------------------------------

struct GofFiles {
  const GofReport* report = nullptr;
};

// Emits chain CSV, summary JSON, per-method partition CSVs, GoF CSV + means
// JSON, aligned-position CSV, log-likelihood trace CSV, optional pointwise
// CSV, and a manifest JSON tying them together. Returns the manifest path.
std::string write_outputs(const PosteriorChain& chain,
                          const std::vector<ParamSummary>& summaries,
                          const std::map<std::string, Partition>& partitions,
                          const GofReport* gof, const Eigen::MatrixXd* aligned_positions,
                          const std::string& out_dir, std::uint64_t config_hash_value);

}  // namespace lpjmm
