#include "lpjmm/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "lpjmm/rng.hpp"

namespace lpjmm {

Partition canonicalize(const std::vector<int>& labels) {
  Partition out;
  out.labels.reserve(labels.size());
  std::map<int, int> seen;
  for (int v : labels) {
    auto [it, inserted] = seen.emplace(v, static_cast<int>(seen.size()) + 1);
    out.labels.push_back(it->second);
  }
  out.n_groups = static_cast<int>(seen.size());
  return out;
}

Eigen::MatrixXd procrustes_align(const Eigen::MatrixXd& sample, const Eigen::MatrixXd& reference) {
  if (sample.rows() != reference.rows() || sample.cols() != reference.cols())
    throw std::invalid_argument("procrustes_align: shape mismatch");
  const Eigen::RowVectorXd mean_s = sample.colwise().mean();
  const Eigen::RowVectorXd mean_r = reference.colwise().mean();
  const Eigen::MatrixXd a0 = sample.rowwise() - mean_s;
  const Eigen::MatrixXd b0 = reference.rowwise() - mean_r;
  const double ref_norm2 = b0.squaredNorm();
  if (!(ref_norm2 > 0.0))
    throw std::invalid_argument("procrustes_align: degenerate reference (identical points)");
  const double a_norm2 = a0.squaredNorm();
  Eigen::MatrixXd aligned(sample.rows(), sample.cols());
  if (a_norm2 > 0.0) {
    const Eigen::MatrixXd s = a0.transpose() * b0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(s, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::MatrixXd rot = svd.matrixU() * svd.matrixV().transpose();
    const double scale = svd.singularValues().sum() / a_norm2;
    aligned = scale * a0 * rot;
  } else {
    aligned.setZero();
  }
  aligned.rowwise() += mean_r;
  return aligned;
}

Eigen::MatrixXd posterior_mean_positions(const std::vector<Eigen::MatrixXd>& z_draws,
                                         const Eigen::MatrixXd& reference) {
  if (z_draws.empty()) throw std::invalid_argument("posterior_mean_positions: empty chain");
  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(reference.rows(), reference.cols());
  for (const auto& z : z_draws) total += procrustes_align(z, reference);
  return total / static_cast<double>(z_draws.size());
}

Eigen::MatrixXd posterior_mean_positions(const PosteriorChain& chain,
                                         const Eigen::MatrixXd& reference) {
  std::vector<Eigen::MatrixXd> zs;
  zs.reserve(chain.draws.size());
  for (const auto& d : chain.draws) zs.push_back(d.z);
  return posterior_mean_positions(zs, reference);
}

Eigen::MatrixXd posterior_similarity(const std::vector<std::vector<int>>& g_draws) {
  if (g_draws.empty()) throw std::invalid_argument("posterior_similarity: no draws");
  const int n = static_cast<int>(g_draws.front().size());
  for (const auto& g : g_draws)
    if (static_cast<int>(g.size()) != n)
      throw std::invalid_argument("posterior_similarity: draw length mismatch");
  const double m = static_cast<double>(g_draws.size());
  Eigen::MatrixXd psm(n, n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    psm(i, i) = 1.0;
    for (int j = i + 1; j < n; ++j) {
      long c = 0;
      for (const auto& g : g_draws) c += (g[i] == g[j]);
      const double f = c / m;
      psm(i, j) = f;
      psm(j, i) = f;
    }
  }
  return psm;
}

double adjusted_rand_index(const std::vector<int>& p, const std::vector<int>& q) {
  if (p.size() != q.size()) throw std::invalid_argument("adjusted_rand_index: length mismatch");
  const Partition cp = canonicalize(p);
  const Partition cq = canonicalize(q);
  const std::size_t n = p.size();
  Eigen::MatrixXd cont = Eigen::MatrixXd::Zero(cp.n_groups, cq.n_groups);
  for (std::size_t t = 0; t < n; ++t) cont(cp.labels[t] - 1, cq.labels[t] - 1) += 1.0;
  const auto choose2 = [](double v) { return 0.5 * v * (v - 1.0); };
  double sum_cells = 0.0;
  for (int r = 0; r < cp.n_groups; ++r)
    for (int c = 0; c < cq.n_groups; ++c) sum_cells += choose2(cont(r, c));
  double sum_rows = 0.0, sum_cols = 0.0;
  for (int r = 0; r < cp.n_groups; ++r) sum_rows += choose2(cont.row(r).sum());
  for (int c = 0; c < cq.n_groups; ++c) sum_cols += choose2(cont.col(c).sum());
  const double total = choose2(static_cast<double>(n));
  const double expected = sum_rows * sum_cols / total;
  const double maximum = 0.5 * (sum_rows + sum_cols);
  const double denom = maximum - expected;
  if (denom == 0.0) return 1.0;  // both partitions degenerate and identical
  return (sum_cells - expected) / denom;
}

PartitionMethod partition_method_from_string(const std::string& name) {
  if (name == "maxpear") return PartitionMethod::MaxPear;
  if (name == "minbinder") return PartitionMethod::MinBinder;
  if (name == "greedyepl") return PartitionMethod::GreedyEpl;
  throw std::invalid_argument("unknown partition method: " + name);
}

std::string to_string(PartitionMethod m) {
  switch (m) {
    case PartitionMethod::MaxPear: return "maxpear";
    case PartitionMethod::MinBinder: return "minbinder";
    case PartitionMethod::GreedyEpl: return "greedyepl";
  }
  return "?";
}

namespace {

// Average-linkage agglomeration of 1 - PSM; returns the partition at every
// merge height, from n groups down to 1.
std::vector<std::vector<int>> average_linkage_cuts(const Eigen::MatrixXd& psm) {
  const int n = static_cast<int>(psm.rows());
  Eigen::MatrixXd dist = Eigen::MatrixXd::Ones(n, n) - psm;
  std::vector<int> size(n, 1);
  std::vector<bool> alive(n, true);
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) labels[i] = i + 1;
  std::vector<std::vector<int>> cuts;
  cuts.push_back(labels);
  for (int merge = 0; merge < n - 1; ++merge) {
    int bi = -1, bj = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      if (!alive[i]) continue;
      for (int j = i + 1; j < n; ++j) {
        if (!alive[j]) continue;
        if (dist(i, j) < best) {
          best = dist(i, j);
          bi = i;
          bj = j;
        }
      }
    }
    // Lance-Williams average-linkage update into bi
    for (int k = 0; k < n; ++k) {
      if (!alive[k] || k == bi || k == bj) continue;
      const double d = (size[bi] * dist(bi, k) + size[bj] * dist(bj, k)) /
                       static_cast<double>(size[bi] + size[bj]);
      dist(bi, k) = d;
      dist(k, bi) = d;
    }
    size[bi] += size[bj];
    alive[bj] = false;
    const int from = labels[bj];
    for (int t = 0; t < n; ++t)
      if (labels[t] == from) labels[t] = labels[bi];
    cuts.push_back(labels);
  }
  return cuts;
}

struct ScoredPartition {
  double score = 0;  // larger is better
  Partition part;
};

bool better(const ScoredPartition& a, const ScoredPartition& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.part.labels < b.part.labels;  // deterministic tie-break
}

double pear_score(const std::vector<int>& labels, const Eigen::MatrixXd& psm) {
  const int n = static_cast<int>(labels.size());
  double sum_i = 0, sum_p = 0, sum_ip = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double same = labels[i] == labels[j] ? 1.0 : 0.0;
      sum_i += same;
      sum_p += psm(i, j);
      sum_ip += same * psm(i, j);
    }
  const double total = 0.5 * n * (n - 1.0);
  const double expected = sum_i * sum_p / total;
  const double denom = 0.5 * (sum_i + sum_p) - expected;
  if (denom == 0.0) return 0.0;
  return (sum_ip - expected) / denom;
}

double binder_loss(const std::vector<int>& labels, const Eigen::MatrixXd& psm) {
  const int n = static_cast<int>(labels.size());
  double loss = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double same = labels[i] == labels[j] ? 1.0 : 0.0;
      loss += std::abs(same - psm(i, j));
    }
  return loss;
}

// Deterministic single-actor label-move descent on a PSM score. Runs after
// candidate selection so the estimators are not limited to the candidate
// family; strictly improving moves only, actors and labels in index order.
template <class Score>
std::vector<int> refine_labels(std::vector<int> labels, int max_groups, Score&& score,
                               bool maximize) {
  const int n = static_cast<int>(labels.size());
  const int cap = max_groups > 0 ? std::min(max_groups, n) : n;
  double current = score(labels);
  for (int pass = 0; pass < 100; ++pass) {
    bool moved = false;
    for (int i = 0; i < n; ++i) {
      int gmax = 0;
      for (int v : labels) gmax = std::max(gmax, v);
      const int limit = std::min(cap, gmax + 1);
      const int keep = labels[i];
      int best_label = keep;
      double best = current;
      for (int to = 1; to <= limit; ++to) {
        if (to == keep) continue;
        labels[i] = to;
        const double s = score(labels);
        if (maximize ? s > best + 1e-12 : s < best - 1e-12) {
          best = s;
          best_label = to;
        }
      }
      labels[i] = best_label;
      if (best_label != keep) {
        current = best;
        moved = true;
      }
    }
    if (!moved) break;
  }
  return labels;
}

// Greedy descent on the sampled-draw estimate of expected variation of
// information. Only two label-dependent pieces move: sum_r f(n_r) over the
// candidate's group sizes and, per draw, sum_{rs} f(n_rs) over the
// contingency with that draw, where f(n) = n log n.
class GreedyVi {
 public:
  GreedyVi(const std::vector<std::vector<int>>& draws, int n, int max_groups)
      : draws_(draws), n_(n), max_label_(max_groups > 0 ? std::min(max_groups, n) : n) {}

  std::pair<double, Partition> descend(std::vector<int> start) {
    const Partition cs = canonicalize(start);
    labels_ = cs.labels;
    const int m = static_cast<int>(draws_.size());
    draw_groups_.resize(m);
    cont_.assign(m, {});
    for (int d = 0; d < m; ++d) {
      int gmax = 0;
      for (int v : draws_[d]) gmax = std::max(gmax, v);
      draw_groups_[d] = gmax;
      cont_[d].assign(static_cast<std::size_t>(max_label_ + 1) * (gmax + 1), 0);
    }
    counts_.assign(max_label_ + 1, 0);
    for (int i = 0; i < n_; ++i) {
      ++counts_[labels_[i]];
      for (int d = 0; d < m; ++d) ++cont_at(d, labels_[i], draws_[d][i]);
    }

    for (int pass = 0; pass < 200; ++pass) {
      bool moved = false;
      for (int i = 0; i < n_; ++i) {
        const int cur = labels_[i];
        int used = 0;
        for (int r = 1; r <= max_label_; ++r) used = counts_[r] > 0 ? r : used;
        const int limit = std::min(max_label_, used + 1);
        int best_to = cur;
        double best_delta = -1e-12;  // strictly improving moves only
        for (int to = 1; to <= limit; ++to) {
          if (to == cur) continue;
          const double d = move_delta(i, cur, to);
          if (d < best_delta) {
            best_delta = d;
            best_to = to;
          }
        }
        if (best_to != cur) {
          apply_move(i, cur, best_to);
          moved = true;
        }
      }
      if (!moved) break;
    }
    return {expected_vi(), canonicalize(labels_)};
  }

 private:
  static double f(double v) { return v > 0.0 ? v * std::log(v) : 0.0; }

  int& cont_at(int d, int label, int draw_label) {
    return cont_[d][static_cast<std::size_t>(label) * (draw_groups_[d] + 1) + draw_label];
  }

  double move_delta(int i, int from, int to) {
    const double m = static_cast<double>(draws_.size());
    double delta = (f(counts_[from] - 1) - f(counts_[from]) + f(counts_[to] + 1) - f(counts_[to])) / n_;
    double cells = 0.0;
    for (std::size_t d = 0; d < draws_.size(); ++d) {
      const int s = draws_[d][i];
      const int nf = cont_at(static_cast<int>(d), from, s);
      const int nt = cont_at(static_cast<int>(d), to, s);
      cells += f(nf - 1) - f(nf) + f(nt + 1) - f(nt);
    }
    delta -= 2.0 * cells / (m * n_);
    return delta;
  }

  void apply_move(int i, int from, int to) {
    --counts_[from];
    ++counts_[to];
    labels_[i] = to;
    for (std::size_t d = 0; d < draws_.size(); ++d) {
      const int s = draws_[d][i];
      --cont_at(static_cast<int>(d), from, s);
      ++cont_at(static_cast<int>(d), to, s);
    }
  }

  double expected_vi() const {
    const double m = static_cast<double>(draws_.size());
    double a = 0.0;
    for (int r = 1; r <= max_label_; ++r) a += f(counts_[r]);
    double dterm = 0.0, cells = 0.0;
    for (std::size_t d = 0; d < draws_.size(); ++d) {
      std::vector<int> sc(draw_groups_[d] + 1, 0);
      for (int i = 0; i < n_; ++i) ++sc[draws_[d][i]];
      for (int s = 1; s <= draw_groups_[d]; ++s) dterm += f(sc[s]);
      for (int r = 1; r <= max_label_; ++r)
        for (int s = 1; s <= draw_groups_[d]; ++s)
          cells += f(cont_[d][static_cast<std::size_t>(r) * (draw_groups_[d] + 1) + s]);
    }
    return a / n_ + dterm / (m * n_) - 2.0 * cells / (m * n_);
  }

  const std::vector<std::vector<int>>& draws_;
  int n_;
  int max_label_;
  std::vector<int> labels_;
  std::vector<int> counts_;
  std::vector<int> draw_groups_;
  std::vector<std::vector<int>> cont_;
};

}  // namespace

Partition point_estimate_partition(const std::vector<std::vector<int>>& g_draws,
                                   const Eigen::MatrixXd& psm, PartitionMethod method,
                                   int max_groups, std::uint64_t seed) {
  if (g_draws.empty()) throw std::invalid_argument("point_estimate_partition: no draws");
  const int n = static_cast<int>(g_draws.front().size());
  if (psm.rows() != n || psm.cols() != n)
    throw std::invalid_argument("point_estimate_partition: psm shape mismatch");

  if (method == PartitionMethod::GreedyEpl) {
    GreedyVi greedy(g_draws, n, max_groups);
    Rng rng(seed);
    double best_score = std::numeric_limits<double>::infinity();
    Partition best;
    for (int r = 0; r < 5; ++r) {
      const std::size_t idx =
          static_cast<std::size_t>(rng.uniform() * static_cast<double>(g_draws.size()));
      auto [score, part] = greedy.descend(g_draws[std::min(idx, g_draws.size() - 1)]);
      if (score < best_score || (score == best_score && part.labels < best.labels)) {
        best_score = score;
        best = std::move(part);
      }
    }
    return best;
  }

  // candidate set: sampled partitions plus average-linkage cuts of 1 - PSM
  std::vector<std::vector<int>> candidates;
  for (const auto& g : g_draws) candidates.push_back(canonicalize(g).labels);
  for (const auto& c : average_linkage_cuts(psm)) candidates.push_back(canonicalize(c).labels);

  ScoredPartition best;
  bool have = false;
  for (const auto& cand : candidates) {
    Partition part = canonicalize(cand);
    if (max_groups > 0 && part.n_groups > max_groups) continue;
    ScoredPartition sp;
    sp.score = method == PartitionMethod::MaxPear ? pear_score(part.labels, psm)
                                                  : -binder_loss(part.labels, psm);
    sp.part = std::move(part);
    if (!have || better(sp, best)) {
      best = std::move(sp);
      have = true;
    }
  }
  if (!have) throw std::invalid_argument("point_estimate_partition: empty candidate set");

  if (method == PartitionMethod::MaxPear) {
    return canonicalize(refine_labels(
        best.part.labels, max_groups, [&](const std::vector<int>& c) { return pear_score(c, psm); },
        true));
  }
  return canonicalize(refine_labels(
      best.part.labels, max_groups, [&](const std::vector<int>& c) { return binder_loss(c, psm); },
      false));
}

double waic(const Eigen::MatrixXd& pointwise_loglik) {
  const Eigen::Index s = pointwise_loglik.rows();
  const Eigen::Index cells = pointwise_loglik.cols();
  if (s < 2) throw std::invalid_argument("waic: needs at least 2 draws");
  double lppd = 0.0, p_waic = 0.0;
  for (Eigen::Index c = 0; c < cells; ++c) {
    const auto col = pointwise_loglik.col(c);
    const double mx = col.maxCoeff();
    double acc = 0.0;
    for (Eigen::Index r = 0; r < s; ++r) acc += std::exp(col[r] - mx);
    lppd += mx + std::log(acc / static_cast<double>(s));
    const double mean = col.mean();
    p_waic += (col.array() - mean).square().sum() / static_cast<double>(s - 1);
  }
  return -2.0 * (lppd - p_waic);
}

double empirical_quantile(std::vector<double> values, double prob) {
  if (values.empty()) throw std::invalid_argument("empirical_quantile: no values");
  std::sort(values.begin(), values.end());
  const double h = prob * (static_cast<double>(values.size()) - 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double w = h - std::floor(h);
  return (1.0 - w) * values[lo] + w * values[hi];
}

std::vector<ParamSummary> summarize_chain(const PosteriorChain& chain, double level) {
  if (chain.draws.empty()) throw std::invalid_argument("summarize_chain: empty chain");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("summarize_chain: bad level");
  const double plo = 0.5 * (1.0 - level);
  const double phi_q = 1.0 - plo;
  std::vector<ParamSummary> out;
  const auto add = [&](const std::string& name, const std::vector<double>& draws) {
    ParamSummary s;
    s.name = name;
    double total = 0.0;
    for (double v : draws) total += v;
    s.mean = total / static_cast<double>(draws.size());
    s.lower = empirical_quantile(draws, plo);
    s.upper = empirical_quantile(draws, phi_q);
    out.push_back(std::move(s));
  };
  const auto collect = [&](auto&& get) {
    std::vector<double> v;
    v.reserve(chain.draws.size());
    for (const auto& d : chain.draws) v.push_back(get(d));
    return v;
  };

  const int L = chain.meta.n_layers;
  const int H = chain.meta.H;
  const int K = chain.meta.K;
  for (int l = 0; l < L; ++l)
    add("a." + std::to_string(l + 1), collect([l](const ModelState& s) { return s.a[l]; }));
  for (int l = 0; l < L; ++l)
    add("b." + std::to_string(l + 1), collect([l](const ModelState& s) { return s.b[l]; }));
  for (int l = 0; l < L; ++l)
    add("theta." + std::to_string(l + 1),
        collect([l](const ModelState& s) { return s.theta[l]; }));
  add("beta", collect([](const ModelState& s) { return s.beta; }));
  add("sigma2", collect([](const ModelState& s) { return s.sigma2; }));
  add("tau2", collect([](const ModelState& s) { return s.tau2; }));
  add("phi", collect([](const ModelState& s) { return s.phi; }));
  for (int h = 0; h < H; ++h)
    add("omega." + std::to_string(h + 1),
        collect([h](const ModelState& s) { return s.omega[h]; }));
  for (int h = 0; h < H; ++h)
    add("kappa2." + std::to_string(h + 1),
        collect([h](const ModelState& s) { return s.kappa2[h]; }));
  for (int h = 0; h < H; ++h)
    for (int k = 0; k < K; ++k)
      add("mu." + std::to_string(h + 1) + "." + std::to_string(k + 1),
          collect([h, k](const ModelState& s) { return s.mu(h, k); }));
  for (int l = 0; l < L; ++l)
    for (int m = 0; m < L; ++m) {
      if (l == m) continue;
      add("theta_ratio." + std::to_string(l + 1) + "." + std::to_string(m + 1),
          collect([l, m](const ModelState& s) { return s.theta[l] / s.theta[m]; }));
    }
  return out;
}

}  // namespace lpjmm
