#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "lpjmm/io.hpp"

namespace lpjmm {

namespace {

using nlohmann::json;

void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write: " + path);
  out << body;
}

}  // namespace

std::string write_outputs(const PosteriorChain& chain,
                          const std::vector<ParamSummary>& summaries,
                          const std::map<std::string, Partition>& partitions,
                          const GofReport* gof, const Eigen::MatrixXd* aligned_positions,
                          const std::string& out_dir, std::uint64_t config_hash_value) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  std::vector<std::string> files;
  const auto emit = [&](const std::string& name) {
    files.push_back(name);
    return (fs::path(out_dir) / name).string();
  };

  write_chain_csv(emit("chain.csv"), chain);

  {
    json j = json::array();
    for (const auto& s : summaries)
      j.push_back({{"name", s.name}, {"mean", s.mean}, {"lower", s.lower}, {"upper", s.upper}});
    write_text(emit("summary.json"), j.dump(2) + "\n");
  }

  for (const auto& [method, part] : partitions)
    write_labels_csv(emit("partition_" + method + ".csv"), part.labels);

  if (gof != nullptr) {
    {
      std::ofstream out(emit("gof.csv"));
      out << "layer,replicate,density,transitivity,assortativity_group,assortativity_attr\n";
      for (std::size_t l = 0; l < gof->density.size(); ++l)
        for (std::size_t r = 0; r < gof->density[l].size(); ++r)
          out << (l + 1) << ',' << (r + 1) << ',' << format_double(gof->density[l][r]) << ','
              << format_double(gof->transitivity[l][r]) << ','
              << format_double(gof->assort_cat[l][r]) << ','
              << format_double(gof->assort_num[l][r]) << '\n';
    }
    json j;
    j["stride"] = gof->stride;
    j["mean_density"] = gof->mean_density;
    j["mean_transitivity"] = gof->mean_transitivity;
    j["mean_assortativity_group"] = gof->mean_assort_cat;
    j["mean_assortativity_attr"] = gof->mean_assort_num;
    write_text(emit("gof_means.json"), j.dump(2) + "\n");
  }

  if (aligned_positions != nullptr)
    write_matrix_csv(emit("aligned_positions.csv"), *aligned_positions, "z");

  {
    std::ofstream out(emit("loglik_trace.csv"));
    out << "draw,loglik\n";
    for (std::size_t d = 0; d < chain.loglik.size(); ++d)
      out << (d + 1) << ',' << format_double(chain.loglik[d]) << '\n';
  }

  if (chain.pointwise.rows() > 0) write_pointwise_csv(emit("pointwise_loglik.csv"), chain.pointwise);

  json manifest;
  manifest["format"] = "lpjmm-run-1";
  manifest["version"] = "0.1.0";
  manifest["seed"] = chain.meta.config.seed;
  manifest["config_hash"] = config_hash_value;
  manifest["data_fingerprint"] = chain.meta.data_fingerprint;
  manifest["n_actors"] = chain.meta.n_actors;
  manifest["n_layers"] = chain.meta.n_layers;
  manifest["K"] = chain.meta.K;
  manifest["H"] = chain.meta.H;
  manifest["draws"] = chain.draws.size();
  manifest["chain"] = {{"n_adapt", chain.meta.config.n_adapt},
                       {"n_burn", chain.meta.config.n_burn},
                       {"n_keep", chain.meta.config.n_keep},
                       {"thin", chain.meta.config.thin}};
  manifest["steps"] = {{"z", chain.meta.final_steps.z},
                       {"sigma2", chain.meta.final_steps.sigma2},
                       {"tau2", chain.meta.final_steps.tau2},
                       {"phi", chain.meta.final_steps.phi},
                       {"theta", chain.meta.final_steps.theta}};
  manifest["acceptance"] = {{"z", chain.meta.accept_rates.z},
                            {"sigma2", chain.meta.accept_rates.sigma2},
                            {"tau2", chain.meta.accept_rates.tau2},
                            {"phi", chain.meta.accept_rates.phi},
                            {"theta", chain.meta.accept_rates.theta}};
  manifest["files"] = files;
  const std::string manifest_path = (std::filesystem::path(out_dir) / "manifest.json").string();
  write_text(manifest_path, manifest.dump(2) + "\n");
  return manifest_path;
}

}  // namespace lpjmm
