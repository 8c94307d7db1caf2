#include <fstream>

#include <json.hpp>

#include "lpjmm/sampler.hpp"

namespace lpjmm {

namespace {

using nlohmann::json;

json to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows > 0 ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  return m;
}

json to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vector_from(const json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

json state_to_json(const ModelState& s) {
  json j;
  j["z"] = to_json(s.z);
  j["g"] = s.g;
  j["a"] = to_json(s.a);
  j["b"] = to_json(s.b);
  j["theta"] = to_json(s.theta);
  j["beta"] = s.beta;
  j["sigma2"] = s.sigma2;
  j["tau2"] = s.tau2;
  j["phi"] = s.phi;
  j["omega"] = to_json(s.omega);
  j["mu"] = to_json(s.mu);
  j["kappa2"] = to_json(s.kappa2);
  return j;
}

ModelState state_from_json(const json& j) {
  ModelState s;
  s.z = matrix_from(j.at("z"));
  s.g = j.at("g").get<std::vector<int>>();
  s.a = vector_from(j.at("a"));
  s.b = vector_from(j.at("b"));
  s.theta = vector_from(j.at("theta"));
  s.beta = j.at("beta").get<double>();
  s.sigma2 = j.at("sigma2").get<double>();
  s.tau2 = j.at("tau2").get<double>();
  s.phi = j.at("phi").get<double>();
  s.omega = vector_from(j.at("omega"));
  s.mu = matrix_from(j.at("mu"));
  s.kappa2 = vector_from(j.at("kappa2"));
  return s;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  json j;
  j["format"] = "lpjmm-checkpoint-1";
  j["fingerprint"] = ck.fingerprint;
  j["config_hash"] = ck.config_hash;
  j["sweep_index"] = ck.sweep_index;
  j["state"] = state_to_json(ck.state);
  j["rng"] = ck.rng_state;
  j["log_step_z"] = ck.log_step_z;
  j["log_step_sigma2"] = ck.log_step_sigma2;
  j["log_step_tau2"] = ck.log_step_tau2;
  j["log_step_phi"] = ck.log_step_phi;
  j["log_step_theta"] = ck.log_step_theta;
  j["adapt_iter"] = ck.adapt_iter;
  j["accept_sums"] = ck.accept_sums;
  j["accept_counts"] = ck.accept_counts;
  json draws = json::array();
  for (const auto& d : ck.draws) draws.push_back(state_to_json(d));
  j["draws"] = std::move(draws);
  j["loglik"] = ck.loglik;
  j["pointwise"] = ck.pointwise;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << j.dump() << "\n";
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint: " + path);
  json j;
  in >> j;
  if (j.value("format", "") != std::string("lpjmm-checkpoint-1"))
    throw std::runtime_error("unrecognized checkpoint format: " + path);
  Checkpoint ck;
  ck.fingerprint = j.at("fingerprint").get<std::uint64_t>();
  ck.config_hash = j.at("config_hash").get<std::uint64_t>();
  ck.sweep_index = j.at("sweep_index").get<long>();
  ck.state = state_from_json(j.at("state"));
  ck.rng_state = j.at("rng").get<std::string>();
  ck.log_step_z = j.at("log_step_z").get<double>();
  ck.log_step_sigma2 = j.at("log_step_sigma2").get<double>();
  ck.log_step_tau2 = j.at("log_step_tau2").get<double>();
  ck.log_step_phi = j.at("log_step_phi").get<double>();
  ck.log_step_theta = j.at("log_step_theta").get<std::vector<double>>();
  ck.adapt_iter = j.at("adapt_iter").get<long>();
  ck.accept_sums = j.at("accept_sums").get<std::vector<double>>();
  ck.accept_counts = j.at("accept_counts").get<std::vector<long>>();
  for (const auto& d : j.at("draws")) ck.draws.push_back(state_from_json(d));
  ck.loglik = j.at("loglik").get<std::vector<double>>();
  ck.pointwise = j.at("pointwise").get<std::vector<std::vector<double>>>();
  return ck;
}

}  // namespace lpjmm
