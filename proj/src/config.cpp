#include <cstring>
#include <fstream>

#include "lpjmm/io.hpp"
#include "lpjmm/model.hpp"

namespace lpjmm {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& v, const std::string& path, long line) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw parse_error(path, line, 1, "expected boolean, got '" + v + "'");
}

std::uint64_t fnv1a_str(std::uint64_t h, const std::string& s) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a_dbl(std::uint64_t h, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  for (int k = 0; k < 8; ++k) {
    h ^= (bits >> (8 * k)) & 0xff;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  RunConfig cfg;
  // K and H defaults get overwritten once [model] is seen; alpha/m_mu resized then
  int want_k = cfg.hyper.K, want_h = cfg.hyper.H;
  bool alpha_set = false;
  double alpha_scalar = 1.0;

  std::string section;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw parse_error(path, lineno, 1, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw parse_error(path, lineno, 1, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto num = [&] { return parse_double(value); };
    const auto integer = [&] { return static_cast<long>(parse_double(value)); };

    if (section == "data") {
      if (key == "layer") cfg.layer_paths.push_back(value);
      else if (key == "edge_list") cfg.edge_list_path = value;
      else if (key == "edge_list_actors") cfg.edge_list_actors = static_cast<int>(integer());
      else if (key == "edge_list_layers") cfg.edge_list_layers = static_cast<int>(integer());
      else if (key == "na_pairs") cfg.na_pairs_path = value;
      else if (key == "attribute") cfg.attribute_path = value;
      else if (key == "true_g") cfg.true_g_path = value;
      else if (key == "true_z") cfg.true_z_path = value;
      else if (key == "standardize") cfg.standardize_x = parse_bool(value, path, lineno);
      else throw parse_error(path, lineno, 1, "unknown [data] key '" + key + "'");
    } else if (section == "model") {
      if (key == "K") want_k = static_cast<int>(integer());
      else if (key == "H") want_h = static_cast<int>(integer());
      else throw parse_error(path, lineno, 1, "unknown [model] key '" + key + "'");
    } else if (section == "hyper") {
      auto& hp = cfg.hyper;
      if (key == "m_a") hp.m_a = num();
      else if (key == "nu_a2") hp.nu_a2 = num();
      else if (key == "m_b") hp.m_b = num();
      else if (key == "nu_b2") hp.nu_b2 = num();
      else if (key == "lambda1") hp.lambda1 = num();
      else if (key == "lambda2") hp.lambda2 = num();
      else if (key == "nu_beta2") hp.nu_beta2 = num();
      else if (key == "eta1") hp.eta1 = num();
      else if (key == "eta2") hp.eta2 = num();
      else if (key == "xi1") hp.xi1 = num();
      else if (key == "xi2") hp.xi2 = num();
      else if (key == "u1") hp.u1 = num();
      else if (key == "u2") hp.u2 = num();
      else if (key == "alpha") { alpha_scalar = num(); alpha_set = true; }
      else if (key == "nu_mu2") hp.nu_mu2 = num();
      else if (key == "gamma1") hp.gamma1 = num();
      else if (key == "gamma2") hp.gamma2 = num();
      else throw parse_error(path, lineno, 1, "unknown [hyper] key '" + key + "'");
    } else if (section == "chain") {
      auto& ch = cfg.chain;
      if (key == "n_adapt") ch.n_adapt = integer();
      else if (key == "n_burn") ch.n_burn = integer();
      else if (key == "n_keep") ch.n_keep = integer();
      else if (key == "thin") ch.thin = static_cast<int>(integer());
      else if (key == "seed") ch.seed = static_cast<std::uint64_t>(integer());
      else if (key == "step_z") ch.step_z = num();
      else if (key == "step_theta") ch.step_theta = num();
      else if (key == "step_sigma2") ch.step_sigma2 = num();
      else if (key == "step_tau2") ch.step_tau2 = num();
      else if (key == "step_phi") ch.step_phi = num();
      else if (key == "accept_low") ch.accept_low = num();
      else if (key == "accept_high") ch.accept_high = num();
      else if (key == "checkpoint_every") ch.checkpoint_every = integer();
      else if (key == "checkpoint_path") ch.checkpoint_path = value;
      else if (key == "store_pointwise") ch.store_pointwise = parse_bool(value, path, lineno);
      else throw parse_error(path, lineno, 1, "unknown [chain] key '" + key + "'");
    } else if (section == "post") {
      auto& po = cfg.post;
      if (key == "level") po.level = num();
      else if (key == "gof_stride") po.gof_stride = static_cast<int>(integer());
      else if (key == "max_groups") po.max_groups = static_cast<int>(integer());
      else if (key == "gof_regenerate_attributes")
        po.gof_regenerate_attributes = parse_bool(value, path, lineno);
      else if (key == "methods") {
        po.methods.clear();
        std::string rest = value;
        while (!rest.empty()) {
          const auto comma = rest.find(',');
          po.methods.push_back(trim(rest.substr(0, comma)));
          if (comma == std::string::npos) break;
          rest = rest.substr(comma + 1);
        }
        for (const auto& m : po.methods) partition_method_from_string(m);  // validate
      } else {
        throw parse_error(path, lineno, 1, "unknown [post] key '" + key + "'");
      }
    } else if (section == "output") {
      if (key == "dir") cfg.out_dir = value;
      else throw parse_error(path, lineno, 1, "unknown [output] key '" + key + "'");
    } else {
      throw parse_error(path, lineno, 1, "unknown section '" + section + "'");
    }
  }

  Hyperparameters resized(want_k, want_h);
  // carry scalar overrides across the resize
  const Hyperparameters& o = cfg.hyper;
  resized.m_a = o.m_a; resized.nu_a2 = o.nu_a2;
  resized.m_b = o.m_b; resized.nu_b2 = o.nu_b2;
  resized.lambda1 = o.lambda1; resized.lambda2 = o.lambda2;
  resized.nu_beta2 = o.nu_beta2;
  resized.eta1 = o.eta1; resized.eta2 = o.eta2;
  resized.xi1 = o.xi1; resized.xi2 = o.xi2;
  resized.u1 = o.u1; resized.u2 = o.u2;
  resized.nu_mu2 = o.nu_mu2;
  resized.gamma1 = o.gamma1; resized.gamma2 = o.gamma2;
  if (alpha_set) resized.alpha.setConstant(alpha_scalar);
  cfg.hyper = resized;
  cfg.hyper.validate();
  cfg.chain.validate();
  if (!(cfg.post.level > 0.0 && cfg.post.level < 1.0))
    throw std::invalid_argument("post.level must be in (0, 1)");
  return cfg;
}

std::uint64_t config_hash(const RunConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& p : cfg.layer_paths) h = fnv1a_str(h, p);
  h = fnv1a_str(h, cfg.edge_list_path);
  h = fnv1a_str(h, cfg.na_pairs_path);
  h = fnv1a_str(h, cfg.attribute_path);
  h = fnv1a_str(h, cfg.standardize_x ? "std1" : "std0");
  const auto& hp = cfg.hyper;
  for (double v : {static_cast<double>(hp.K), static_cast<double>(hp.H), hp.m_a, hp.nu_a2,
                   hp.m_b, hp.nu_b2, hp.lambda1, hp.lambda2, hp.nu_beta2, hp.eta1, hp.eta2,
                   hp.xi1, hp.xi2, hp.u1, hp.u2, hp.nu_mu2, hp.gamma1, hp.gamma2})
    h = fnv1a_dbl(h, v);
  for (int i = 0; i < hp.alpha.size(); ++i) h = fnv1a_dbl(h, hp.alpha[i]);
  const auto& ch = cfg.chain;
  for (double v : {static_cast<double>(ch.n_adapt), static_cast<double>(ch.n_burn),
                   static_cast<double>(ch.n_keep), static_cast<double>(ch.thin),
                   static_cast<double>(ch.seed), ch.step_z, ch.step_theta, ch.step_sigma2,
                   ch.step_tau2, ch.step_phi, ch.accept_low, ch.accept_high})
    h = fnv1a_dbl(h, v);
  return h;
}

void standardize(AttributeVector& x) {
  const double mean = x.values.mean();
  const double n = static_cast<double>(x.values.size());
  const double var = (x.values.array() - mean).square().sum() / std::max(n - 1.0, 1.0);
  if (!(var > 0.0)) throw std::invalid_argument("standardize: attribute has zero variance");
  x.values = (x.values.array() - mean) / std::sqrt(var);
}

DatasetBundle load_dataset(const RunConfig& cfg) {
  if (cfg.layer_paths.empty() && cfg.edge_list_path.empty())
    throw std::invalid_argument("config names no network data");
  MultiLayerNetwork net =
      !cfg.layer_paths.empty()
          ? load_adjacency_layers(cfg.layer_paths)
          : load_edge_list(cfg.edge_list_path, cfg.edge_list_actors, cfg.edge_list_layers,
                           cfg.na_pairs_path);
  if (cfg.attribute_path.empty()) throw std::invalid_argument("config names no attribute file");
  AttributeVector x = load_attribute_csv(cfg.attribute_path);
  if (x.size() != net.n_actors())
    throw std::invalid_argument("attribute length " + std::to_string(x.size()) +
                                " does not match actor count " +
                                std::to_string(net.n_actors()));
  DatasetBundle bundle{std::move(net), std::move(x), std::nullopt, std::nullopt, 0, false};
  if (cfg.standardize_x) {
    standardize(bundle.x);
    bundle.standardized = true;
  }
  if (!cfg.true_g_path.empty()) {
    bundle.true_g = load_labels_csv(cfg.true_g_path);
    if (static_cast<int>(bundle.true_g->size()) != bundle.net.n_actors())
      throw std::invalid_argument("true_g length mismatch");
  }
  if (!cfg.true_z_path.empty()) {
    bundle.true_z = load_matrix_csv(cfg.true_z_path);
    if (bundle.true_z->rows() != bundle.net.n_actors())
      throw std::invalid_argument("true_z row count mismatch");
  }
  bundle.fingerprint = data_fingerprint(bundle.net, bundle.x, cfg.hyper);
  return bundle;
}

std::pair<Eigen::VectorXd, double> pca_first_component(const Eigen::MatrixXd& columns) {
  const Eigen::Index n = columns.rows();
  const Eigen::Index p = columns.cols();
  if (p < 2) throw std::invalid_argument("pca_first_component: need at least 2 columns");
  if (n < 2) throw std::invalid_argument("pca_first_component: need at least 2 rows");
  Eigen::MatrixXd std_cols(n, p);
  for (Eigen::Index c = 0; c < p; ++c) {
    const double mean = columns.col(c).mean();
    const double var =
        (columns.col(c).array() - mean).square().sum() / static_cast<double>(n - 1);
    if (!(var > 0.0))
      throw std::invalid_argument("pca_first_component: column " + std::to_string(c + 1) +
                                  " has zero variance");
    std_cols.col(c) = (columns.col(c).array() - mean) / std::sqrt(var);
  }
  const Eigen::MatrixXd corr = std_cols.transpose() * std_cols / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(corr);
  Eigen::VectorXd loading = es.eigenvectors().col(p - 1);  // largest eigenvalue last
  if (loading[0] < 0.0) loading = -loading;
  const double explained = es.eigenvalues()[p - 1] / es.eigenvalues().sum();
  return {std_cols * loading, explained};
}

}  // namespace lpjmm
