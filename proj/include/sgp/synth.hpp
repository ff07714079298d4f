#ifndef SGP_SYNTH_HPP
#define SGP_SYNTH_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgp/graph.hpp"
#include "sgp/textio.hpp"

namespace sgp {

struct GroundTruth {
  IndexSet nodes;
  IndexSet attributes;
};

struct CoherentSynthConfig {
  int n_clusters_incoherent = 9;
  int n_attrs_total = 100;
  int n_attrs_coherent = 10;
  int cluster_size = 30;
  double p_in = 0.35;
  double p_out = 0.1;
  double coherent_std = std::sqrt(0.001);
  uint64_t rng_seed = 0;

  void validate() const {
    if (n_clusters_incoherent < 0) throw std::invalid_argument("coherent synth: negative cluster count");
    if (cluster_size < 1) throw std::invalid_argument("coherent synth: cluster_size must be >= 1");
    if (n_attrs_coherent < 1 || n_attrs_coherent > n_attrs_total)
      throw std::invalid_argument("coherent synth: n_attrs_coherent out of range");
    if (!(0.0 < p_out && p_out < p_in && p_in <= 1.0))
      throw std::invalid_argument("coherent synth: need 0 < p_out < p_in <= 1");
    if (coherent_std <= 0.0) throw std::invalid_argument("coherent synth: coherent_std must be positive");
  }
};

enum class BaseGraph { erdos_renyi, grid, knn };

inline const char* to_string(BaseGraph b) {
  switch (b) {
    case BaseGraph::erdos_renyi: return "erdos-renyi";
    case BaseGraph::grid: return "grid";
    case BaseGraph::knn: return "knn";
  }
  return "?";
}

inline BaseGraph base_graph_from_string(const std::string& s) {
  if (s == "erdos-renyi") return BaseGraph::erdos_renyi;
  if (s == "grid") return BaseGraph::grid;
  if (s == "knn") return BaseGraph::knn;
  throw std::invalid_argument("unknown base graph '" + s + "'");
}

struct AnomalySynthConfig {
  int n = 400;
  int p = 50;
  int cluster_size = 30;
  int n_attrs_anomalous = 5;
  double signal_mu = 3.0;
  BaseGraph base_graph = BaseGraph::grid;
  double er_edge_prob = 0.02;  // erdos-renyi only
  int knn_k = 5;               // knn only
  uint64_t rng_seed = 0;

  void validate() const {
    if (n < 2) throw std::invalid_argument("anomaly synth: n must be >= 2");
    if (p < 1) throw std::invalid_argument("anomaly synth: p must be >= 1");
    if (cluster_size < 1 || cluster_size > n)
      throw std::invalid_argument("anomaly synth: cluster_size out of range");
    if (n_attrs_anomalous < 1 || n_attrs_anomalous > p)
      throw std::invalid_argument("anomaly synth: n_attrs_anomalous out of range");
  }
};

namespace synth_detail {

inline bool subset_connected_edges(const std::vector<std::pair<int, int>>& edges,
                                   const std::vector<int>& nodes) {
  std::vector<int> id(nodes.size());
  std::vector<std::vector<int>> adj(nodes.size());
  std::vector<int> lookup;
  int max_node = *std::max_element(nodes.begin(), nodes.end());
  lookup.assign(max_node + 1, -1);
  for (size_t i = 0; i < nodes.size(); ++i) lookup[nodes[i]] = static_cast<int>(i);
  for (auto [u, v] : edges) {
    if (u <= max_node && v <= max_node && lookup[u] >= 0 && lookup[v] >= 0) {
      adj[lookup[u]].push_back(lookup[v]);
      adj[lookup[v]].push_back(lookup[u]);
    }
  }
  std::vector<char> seen(nodes.size(), 0);
  std::vector<int> stack = {0};
  seen[0] = 1;
  size_t count = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int w : adj[v])
      if (!seen[w]) {
        seen[w] = 1;
        ++count;
        stack.push_back(w);
      }
  }
  return count == nodes.size();
}

}  // namespace synth_detail

// One coherent cluster plus cfg.n_clusters_incoherent incoherent ones.
// Intra-cluster edges appear with probability p_in, inter-cluster with p_out.
// Incoherent entries are standard normal; the coherent cluster's chosen
// attributes are N(mu_j, coherent_std^2) with mu_j drawn once from [-2, 2].
inline std::pair<AttributedNetwork, GroundTruth> generate_coherent(const CoherentSynthConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.rng_seed);
  int clusters = cfg.n_clusters_incoherent + 1;
  int n = clusters * cfg.cluster_size;
  int p = cfg.n_attrs_total;
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::normal_distribution<double> stdnorm(0.0, 1.0);
  std::uniform_real_distribution<double> mu_draw(-2.0, 2.0);

  auto cluster_of = [&](int v) { return v / cfg.cluster_size; };
  std::vector<std::pair<int, int>> inter_edges;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (cluster_of(u) != cluster_of(v) && coin(rng) < cfg.p_out) inter_edges.emplace_back(u, v);

  std::vector<std::pair<int, int>> edges = inter_edges;
  for (int c = 0; c < clusters; ++c) {
    int base = c * cfg.cluster_size;
    std::vector<int> members(cfg.cluster_size);
    std::iota(members.begin(), members.end(), base);
    std::vector<std::pair<int, int>> intra;
    bool ok = false;
    for (int attempt = 0; attempt < 100; ++attempt) {
      intra.clear();
      for (int i = 0; i < cfg.cluster_size; ++i)
        for (int j = i + 1; j < cfg.cluster_size; ++j)
          if (coin(rng) < cfg.p_in) intra.emplace_back(base + i, base + j);
      if (cfg.cluster_size == 1 ||
          (!intra.empty() && synth_detail::subset_connected_edges(intra, members))) {
        ok = true;
        break;
      }
    }
    if (!ok)
      throw std::runtime_error("generate_coherent: cluster " + std::to_string(c) +
                               " stayed disconnected after 100 retries; raise p_in");
    edges.insert(edges.end(), intra.begin(), intra.end());
  }

  Eigen::MatrixXd W(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) W(i, j) = stdnorm(rng);

  GroundTruth truth;
  for (int i = 0; i < cfg.cluster_size; ++i) truth.nodes.push_back(i);
  std::vector<int> attrs(p);
  std::iota(attrs.begin(), attrs.end(), 0);
  std::shuffle(attrs.begin(), attrs.end(), rng);
  attrs.resize(cfg.n_attrs_coherent);
  std::sort(attrs.begin(), attrs.end());
  truth.attributes = attrs;
  for (int j : truth.attributes) {
    double mu = mu_draw(rng);
    std::normal_distribution<double> sig(mu, cfg.coherent_std);
    for (int i : truth.nodes) W(i, j) = sig(rng);
  }
  return {AttributedNetwork(n, std::move(edges), std::move(W)), std::move(truth)};
}

namespace synth_detail {

inline std::vector<std::pair<int, int>> make_base_graph(const AnomalySynthConfig& cfg,
                                                        std::mt19937_64& rng) {
  std::vector<std::pair<int, int>> edges;
  switch (cfg.base_graph) {
    case BaseGraph::grid: {
      int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(cfg.n))));
      for (int v = 0; v < cfg.n; ++v) {
        int c = v % side;
        if (c + 1 < side && v + 1 < cfg.n) edges.emplace_back(v, v + 1);
        if (v + side < cfg.n) edges.emplace_back(v, v + side);
      }
      break;
    }
    case BaseGraph::knn: {
      std::uniform_real_distribution<double> u(0.0, 1.0);
      std::vector<std::pair<double, double>> pts(cfg.n);
      for (auto& pt : pts) pt = {u(rng), u(rng)};
      for (int v = 0; v < cfg.n; ++v) {
        std::vector<std::pair<double, int>> dist;
        dist.reserve(cfg.n - 1);
        for (int w = 0; w < cfg.n; ++w) {
          if (w == v) continue;
          double dx = pts[v].first - pts[w].first, dy = pts[v].second - pts[w].second;
          dist.emplace_back(dx * dx + dy * dy, w);
        }
        int kk = std::min(cfg.knn_k, cfg.n - 1);
        std::partial_sort(dist.begin(), dist.begin() + kk, dist.end());
        for (int i = 0; i < kk; ++i) edges.emplace_back(v, dist[i].second);
      }
      break;
    }
    case BaseGraph::erdos_renyi: {
      std::uniform_real_distribution<double> coin(0.0, 1.0);
      for (int u2 = 0; u2 < cfg.n; ++u2)
        for (int v = u2 + 1; v < cfg.n; ++v)
          if (coin(rng) < cfg.er_edge_prob) edges.emplace_back(u2, v);
      break;
    }
  }
  return edges;
}

}  // namespace synth_detail

// Standard-normal background; a random-walk-connected node subset gets an
// elevated mean signal_mu on a random choice of attributes.
inline std::pair<AttributedNetwork, GroundTruth> generate_anomalous(const AnomalySynthConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.rng_seed);
  std::vector<std::pair<int, int>> edges;
  // Regenerate until the base graph is connected (grid always is).
  std::vector<std::vector<int>> adj;
  for (int attempt = 0;; ++attempt) {
    edges = synth_detail::make_base_graph(cfg, rng);
    adj.assign(cfg.n, {});
    for (auto [u, v] : edges) {
      adj[u].push_back(v);
      adj[v].push_back(u);
    }
    std::vector<char> seen(cfg.n, 0);
    std::vector<int> stack = {0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int w : adj[v])
        if (!seen[w]) {
          seen[w] = 1;
          ++count;
          stack.push_back(w);
        }
    }
    if (count == cfg.n) break;
    if (attempt >= 100)
      throw std::runtime_error("generate_anomalous: base graph stayed disconnected; raise density");
  }

  GroundTruth truth;
  {
    std::uniform_int_distribution<int> pick(0, cfg.n - 1);
    int cur = pick(rng);
    std::vector<char> in(cfg.n, 0);
    in[cur] = 1;
    truth.nodes.push_back(cur);
    long long limit = 100LL * cfg.n, steps = 0;
    while (static_cast<int>(truth.nodes.size()) < cfg.cluster_size) {
      if (steps++ > limit)
        throw std::runtime_error("generate_anomalous: random walk failed to collect " +
                                 std::to_string(cfg.cluster_size) + " nodes");
      cur = adj[cur][std::uniform_int_distribution<size_t>(0, adj[cur].size() - 1)(rng)];
      if (!in[cur]) {
        in[cur] = 1;
        truth.nodes.push_back(cur);
      }
    }
    std::sort(truth.nodes.begin(), truth.nodes.end());
  }
  {
    std::vector<int> attrs(cfg.p);
    std::iota(attrs.begin(), attrs.end(), 0);
    std::shuffle(attrs.begin(), attrs.end(), rng);
    attrs.resize(cfg.n_attrs_anomalous);
    std::sort(attrs.begin(), attrs.end());
    truth.attributes = attrs;
  }

  std::normal_distribution<double> stdnorm(0.0, 1.0);
  Eigen::MatrixXd W(cfg.n, cfg.p);
  for (int i = 0; i < cfg.n; ++i)
    for (int j = 0; j < cfg.p; ++j) W(i, j) = stdnorm(rng);
  for (int j : truth.attributes)
    for (int i : truth.nodes) W(i, j) = cfg.signal_mu + stdnorm(rng);
  return {AttributedNetwork(cfg.n, std::move(edges), std::move(W)), std::move(truth)};
}

struct FMeasure {
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;
};

inline FMeasure f_measure(const IndexSet& truth, const IndexSet& detected) {
  if (detected.empty() || truth.empty()) return {};
  double hit = static_cast<double>(index_set_intersection(truth, detected).size());
  FMeasure m;
  m.precision = hit / detected.size();
  m.recall = hit / truth.size();
  m.f = (m.precision + m.recall > 0.0)
            ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
            : 0.0;
  return m;
}

struct ClusterMetrics {
  double density = 0.0;  // average induced degree, 2|E_S|/|S|
  int size = 0;
  double coherence_distance = 0.0;
  bool singleton = false;
};

inline ClusterMetrics cluster_metrics(const AttributedNetwork& net, const IndexSet& nodes,
                                      const IndexSet& attributes) {
  if (nodes.empty()) throw std::invalid_argument("cluster_metrics: empty cluster");
  ClusterMetrics m;
  m.size = static_cast<int>(nodes.size());
  std::vector<char> in(net.node_count(), 0);
  for (int v : nodes) in[v] = 1;
  int induced = 0;
  for (auto [u, v] : net.edges())
    if (in[u] && in[v]) ++induced;
  m.density = 2.0 * induced / m.size;
  if (nodes.size() < 2) {
    m.singleton = true;
    return m;
  }
  double total = 0.0;
  int pairs = 0;
  for (size_t a = 0; a < nodes.size(); ++a)
    for (size_t b = a + 1; b < nodes.size(); ++b) {
      double d2 = 0.0;
      for (int j : attributes) {
        double diff = net.attributes()(nodes[a], j) - net.attributes()(nodes[b], j);
        d2 += diff * diff;
      }
      total += std::sqrt(d2);
      ++pairs;
    }
  m.coherence_distance = total / pairs;
  return m;
}

inline void save_truth(const GroundTruth& truth, const Document& metadata,
                       const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << "# line 1: node indices; line 2: attribute indices; metadata below\n";
  for (size_t i = 0; i < truth.nodes.size(); ++i)
    f << (i ? " " : "") << truth.nodes[i];
  f << '\n';
  for (size_t i = 0; i < truth.attributes.size(); ++i)
    f << (i ? " " : "") << truth.attributes[i];
  f << '\n';
  f << metadata.to_string();
}

inline GroundTruth load_truth(const std::string& path, Document* metadata = nullptr) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "'");
  GroundTruth truth;
  std::string line;
  int data_lines = 0;
  std::ostringstream rest;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (data_lines >= 2) {
      rest << line << '\n';
      continue;
    }
    std::istringstream is(line);
    int v;
    IndexSet& target = (data_lines == 0) ? truth.nodes : truth.attributes;
    while (is >> v) target.push_back(v);
    ++data_lines;
  }
  if (data_lines < 2) throw std::runtime_error(path + ": truth file needs two index lines");
  if (metadata) {
    std::istringstream is(rest.str());
    *metadata = Document::parse(is);
  }
  return truth;
}

// Per-trial seed from a batch seed; documented so reruns line up.
inline uint64_t trial_seed(uint64_t base_seed, int trial) {
  return base_seed + 0x9e3779b97f4a7c15ULL * static_cast<uint64_t>(trial + 1);
}

}  // namespace sgp

#endif
