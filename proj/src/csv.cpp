#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "lpjmm/io.hpp"

namespace lpjmm {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc{} || res.ptr != end)
    throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    // trim surrounding whitespace
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string{} : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

bool looks_numeric(const std::string& s) {
  if (s.empty()) return false;
  double v;
  return std::from_chars(s.data(), s.data() + s.size(), v).ec == std::errc{};
}

}  // namespace

MultiLayerNetwork load_adjacency_layers(const std::vector<std::string>& paths) {
  if (paths.empty()) throw std::invalid_argument("no layer files given");
  int n = -1;
  std::vector<std::vector<std::vector<std::string>>> tables;
  for (const auto& path : paths) {
    auto lines = read_lines(path);
    std::vector<std::vector<std::string>> table;
    for (const auto& line : lines) table.push_back(split_csv_line(line));
    // optional header row: first cell non-numeric and not NA
    if (!table.empty() && !table[0].empty() && !looks_numeric(table[0][0]) && table[0][0] != "NA")
      table.erase(table.begin());
    const int rows = static_cast<int>(table.size());
    if (n < 0) n = rows;
    if (rows != n)
      throw parse_error(path, rows, 1, "layer has " + std::to_string(rows) +
                                           " rows, expected " + std::to_string(n));
    tables.push_back(std::move(table));
  }

  MultiLayerNetwork net(n, static_cast<int>(paths.size()));
  for (std::size_t l = 0; l < paths.size(); ++l) {
    const auto& table = tables[l];
    for (int i = 0; i < n; ++i) {
      if (static_cast<int>(table[i].size()) != n)
        throw parse_error(paths[l], i + 1, 1,
                          "row has " + std::to_string(table[i].size()) + " cells, expected " +
                              std::to_string(n));
    }
    bool warned_diag = false;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const std::string& cell = table[i][j];
        if (i == j) {
          if (cell != "0" && cell != "" && cell != "NA" && !warned_diag) {
            std::cerr << paths[l] << ": diagonal cells ignored (self-loops undefined)\n";
            warned_diag = true;
          }
          continue;
        }
        if (i > j) continue;  // handled from the upper triangle below
        const std::string& mirror = table[j][i];
        const auto decode = [&](const std::string& v, int r, int c) -> std::int8_t {
          if (v == "0") return 0;
          if (v == "1") return 1;
          if (v == "NA" || v.empty()) return MultiLayerNetwork::kMissing;
          throw parse_error(paths[l], r + 1, c + 1, "cell must be 0, 1, or NA, got '" + v + "'");
        };
        const std::int8_t upper = decode(cell, i, j);
        const std::int8_t lower = decode(mirror, j, i);
        if (upper != MultiLayerNetwork::kMissing && lower != MultiLayerNetwork::kMissing &&
            upper != lower)
          throw parse_error(paths[l], i + 1, j + 1,
                            "asymmetric entries: (" + std::to_string(i + 1) + "," +
                                std::to_string(j + 1) + ") disagrees with (" +
                                std::to_string(j + 1) + "," + std::to_string(i + 1) + ")");
        const std::int8_t v = upper != MultiLayerNetwork::kMissing ? upper : lower;
        net.set_cell(static_cast<int>(l), i, j, v);
      }
    }
  }
  return net;
}

MultiLayerNetwork load_edge_list(const std::string& path, int n_actors, int n_layers,
                                 const std::string& na_pairs_path) {
  MultiLayerNetwork net(n_actors, n_layers);
  const auto apply = [&](const std::string& file, std::int8_t value) {
    auto lines = read_lines(file);
    for (std::size_t r = 0; r < lines.size(); ++r) {
      if (lines[r].empty()) continue;
      auto fields = split_csv_line(lines[r]);
      if (r == 0 && !fields.empty() && !looks_numeric(fields[0])) continue;  // header
      if (fields.size() != 2 && fields.size() != 3)
        throw parse_error(file, static_cast<long>(r + 1), 1, "expected i,j[,layer]");
      const int i = static_cast<int>(parse_double(fields[0]));
      const int j = static_cast<int>(parse_double(fields[1]));
      const int l = fields.size() == 3 ? static_cast<int>(parse_double(fields[2])) : 1;
      if (i < 1 || i > n_actors || j < 1 || j > n_actors || i == j)
        throw parse_error(file, static_cast<long>(r + 1), 1, "bad actor pair");
      if (l < 1 || l > n_layers)
        throw parse_error(file, static_cast<long>(r + 1), 3, "layer out of range");
      net.set_cell(l - 1, i - 1, j - 1, value);
    }
  };
  apply(path, 1);
  if (!na_pairs_path.empty()) apply(na_pairs_path, MultiLayerNetwork::kMissing);
  return net;
}

AttributeVector load_attribute_csv(const std::string& path) {
  auto lines = read_lines(path);
  if (lines.empty()) throw parse_error(path, 1, 1, "empty attribute file");
  std::size_t start = looks_numeric(split_csv_line(lines[0])[0]) ? 0 : 1;
  AttributeVector x;
  x.values.resize(static_cast<Eigen::Index>(lines.size() - start));
  for (std::size_t r = start; r < lines.size(); ++r) {
    const auto fields = split_csv_line(lines[r]);
    if (fields.size() != 1)
      throw parse_error(path, static_cast<long>(r + 1), 1, "expected one column");
    x.values[static_cast<Eigen::Index>(r - start)] = parse_double(fields[0]);
  }
  x.validate();
  return x;
}

void write_adjacency_csv(const std::string& path, const MultiLayerNetwork& net, int layer) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write: " + path);
  const int n = net.n_actors();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j) out << ',';
      if (i == j) {
        out << '0';
      } else {
        const std::int8_t v = net.cell(layer, i, j);
        out << (v == MultiLayerNetwork::kMissing ? "NA" : v == 1 ? "1" : "0");
      }
    }
    out << '\n';
  }
}

void write_attribute_csv(const std::string& path, const AttributeVector& x,
                         const std::string& name) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write: " + path);
  out << name << '\n';
  for (int i = 0; i < x.size(); ++i) out << format_double(x.values[i]) << '\n';
}

void write_labels_csv(const std::string& path, const std::vector<int>& labels) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write: " + path);
  out << "g\n";
  for (int v : labels) out << v << '\n';
}

std::vector<int> load_labels_csv(const std::string& path) {
  auto lines = read_lines(path);
  if (lines.empty()) throw parse_error(path, 1, 1, "empty label file");
  std::size_t start = looks_numeric(split_csv_line(lines[0])[0]) ? 0 : 1;
  std::vector<int> labels;
  for (std::size_t r = start; r < lines.size(); ++r)
    labels.push_back(static_cast<int>(parse_double(split_csv_line(lines[r])[0])));
  return labels;
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m,
                      const std::string& prefix) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write: " + path);
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    if (c) out << ',';
    out << prefix << (c + 1);
  }
  out << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << format_double(m(r, c));
    }
    out << '\n';
  }
}

Eigen::MatrixXd load_matrix_csv(const std::string& path) {
  auto lines = read_lines(path);
  if (lines.empty()) throw parse_error(path, 1, 1, "empty matrix file");
  std::size_t start = looks_numeric(split_csv_line(lines[0])[0]) ? 0 : 1;
  const auto rows = static_cast<Eigen::Index>(lines.size() - start);
  const auto first = split_csv_line(lines[start]);
  Eigen::MatrixXd m(rows, static_cast<Eigen::Index>(first.size()));
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto fields = split_csv_line(lines[start + static_cast<std::size_t>(r)]);
    if (static_cast<Eigen::Index>(fields.size()) != m.cols())
      throw parse_error(path, static_cast<long>(start + r + 1), 1, "ragged matrix row");
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      m(r, c) = parse_double(fields[static_cast<std::size_t>(c)]);
  }
  return m;
}

namespace {

std::vector<std::string> chain_columns(int L, int H, int K, int N) {
  std::vector<std::string> cols;
  for (int l = 1; l <= L; ++l) cols.push_back("a." + std::to_string(l));
  for (int l = 1; l <= L; ++l) cols.push_back("b." + std::to_string(l));
  for (int l = 1; l <= L; ++l) cols.push_back("theta." + std::to_string(l));
  cols.emplace_back("beta");
  cols.emplace_back("sigma2");
  cols.emplace_back("tau2");
  cols.emplace_back("phi");
  for (int h = 1; h <= H; ++h) cols.push_back("omega." + std::to_string(h));
  for (int h = 1; h <= H; ++h) cols.push_back("kappa2." + std::to_string(h));
  for (int h = 1; h <= H; ++h)
    for (int k = 1; k <= K; ++k) cols.push_back("mu." + std::to_string(h) + "." + std::to_string(k));
  for (int i = 1; i <= N; ++i)
    for (int k = 1; k <= K; ++k) cols.push_back("z." + std::to_string(i) + "." + std::to_string(k));
  for (int i = 1; i <= N; ++i) cols.push_back("g." + std::to_string(i));
  cols.emplace_back("loglik");
  return cols;
}

}  // namespace

void write_chain_csv(const std::string& path, const PosteriorChain& chain) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write: " + path);
  const int L = chain.meta.n_layers;
  const int H = chain.meta.H;
  const int K = chain.meta.K;
  const int N = chain.meta.n_actors;
  const auto cols = chain_columns(L, H, K, N);
  for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
  out << '\n';
  for (std::size_t d = 0; d < chain.draws.size(); ++d) {
    const ModelState& s = chain.draws[d];
    std::vector<std::string> vals;
    for (int l = 0; l < L; ++l) vals.push_back(format_double(s.a[l]));
    for (int l = 0; l < L; ++l) vals.push_back(format_double(s.b[l]));
    for (int l = 0; l < L; ++l) vals.push_back(format_double(s.theta[l]));
    vals.push_back(format_double(s.beta));
    vals.push_back(format_double(s.sigma2));
    vals.push_back(format_double(s.tau2));
    vals.push_back(format_double(s.phi));
    for (int h = 0; h < H; ++h) vals.push_back(format_double(s.omega[h]));
    for (int h = 0; h < H; ++h) vals.push_back(format_double(s.kappa2[h]));
    for (int h = 0; h < H; ++h)
      for (int k = 0; k < K; ++k) vals.push_back(format_double(s.mu(h, k)));
    for (int i = 0; i < N; ++i)
      for (int k = 0; k < K; ++k) vals.push_back(format_double(s.z(i, k)));
    for (int i = 0; i < N; ++i) vals.push_back(std::to_string(s.g[i]));
    vals.push_back(format_double(chain.loglik[d]));
    for (std::size_t c = 0; c < vals.size(); ++c) out << (c ? "," : "") << vals[c];
    out << '\n';
  }
}

PosteriorChain load_chain_csv(const std::string& path) {
  auto lines = read_lines(path);
  if (lines.empty()) throw parse_error(path, 1, 1, "empty chain file");
  const auto header = split_csv_line(lines[0]);
  int L = 0, H = 0, K = 0, N = 0;
  for (const auto& col : header) {
    if (col.rfind("a.", 0) == 0 && col.find('.', 2) == std::string::npos)
      L = std::max(L, std::stoi(col.substr(2)));
    if (col.rfind("omega.", 0) == 0) H = std::max(H, std::stoi(col.substr(6)));
    if (col.rfind("z.", 0) == 0) {
      const auto second = col.find('.', 2);
      N = std::max(N, std::stoi(col.substr(2, second - 2)));
      K = std::max(K, std::stoi(col.substr(second + 1)));
    }
  }
  if (L == 0 || H == 0 || K == 0 || N == 0)
    throw parse_error(path, 1, 1, "chain header missing expected columns");
  const auto expected = chain_columns(L, H, K, N);
  if (header != expected) throw parse_error(path, 1, 1, "chain header has unexpected layout");

  PosteriorChain chain;
  chain.meta.n_layers = L;
  chain.meta.H = H;
  chain.meta.K = K;
  chain.meta.n_actors = N;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto fields = split_csv_line(lines[r]);
    if (fields.size() != expected.size())
      throw parse_error(path, static_cast<long>(r + 1), 1, "row width mismatch");
    std::size_t c = 0;
    ModelState s;
    s.a.resize(L);
    s.b.resize(L);
    s.theta.resize(L);
    s.omega.resize(H);
    s.kappa2.resize(H);
    s.mu.resize(H, K);
    s.z.resize(N, K);
    s.g.resize(N);
    for (int l = 0; l < L; ++l) s.a[l] = parse_double(fields[c++]);
    for (int l = 0; l < L; ++l) s.b[l] = parse_double(fields[c++]);
    for (int l = 0; l < L; ++l) s.theta[l] = parse_double(fields[c++]);
    s.beta = parse_double(fields[c++]);
    s.sigma2 = parse_double(fields[c++]);
    s.tau2 = parse_double(fields[c++]);
    s.phi = parse_double(fields[c++]);
    for (int h = 0; h < H; ++h) s.omega[h] = parse_double(fields[c++]);
    for (int h = 0; h < H; ++h) s.kappa2[h] = parse_double(fields[c++]);
    for (int h = 0; h < H; ++h)
      for (int k = 0; k < K; ++k) s.mu(h, k) = parse_double(fields[c++]);
    for (int i = 0; i < N; ++i)
      for (int k = 0; k < K; ++k) s.z(i, k) = parse_double(fields[c++]);
    for (int i = 0; i < N; ++i) s.g[i] = static_cast<int>(parse_double(fields[c++]));
    chain.loglik.push_back(parse_double(fields[c++]));
    chain.draws.push_back(std::move(s));
  }
  return chain;
}

void write_pointwise_csv(const std::string& path, const Eigen::MatrixXd& pointwise) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write: " + path);
  for (Eigen::Index c = 0; c < pointwise.cols(); ++c) out << (c ? "," : "") << "cell." << (c + 1);
  out << '\n';
  for (Eigen::Index r = 0; r < pointwise.rows(); ++r) {
    for (Eigen::Index c = 0; c < pointwise.cols(); ++c)
      out << (c ? "," : "") << format_double(pointwise(r, c));
    out << '\n';
  }
}

Eigen::MatrixXd load_pointwise_csv(const std::string& path) { return load_matrix_csv(path); }

}  // namespace lpjmm
