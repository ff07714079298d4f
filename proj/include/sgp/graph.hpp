#ifndef SGP_GRAPH_HPP
#define SGP_GRAPH_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgp/textio.hpp"

namespace sgp {

// Sorted, duplicate-free index list over [0, n) or [0, p).
using IndexSet = std::vector<int>;

inline IndexSet make_index_set(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

inline IndexSet index_set_union(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline IndexSet index_set_intersection(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline IndexSet support_of(const Eigen::VectorXd& v, double tol = 0.0) {
  IndexSet s;
  for (int i = 0; i < v.size(); ++i)
    if (std::abs(v[i]) > tol) s.push_back(i);
  return s;
}

// Undirected, unweighted graph with a dense n x p attribute matrix.
// Immutable after construction; safe to share across threads.
class AttributedNetwork {
 public:
  AttributedNetwork(int n, std::vector<std::pair<int, int>> edge_list, Eigen::MatrixXd attrs)
      : node_count_(n), attributes_(std::move(attrs)) {
    if (n <= 0) throw std::invalid_argument("network: node count must be positive");
    if (attributes_.rows() != n)
      throw std::invalid_argument("network: attribute matrix has " +
                                  std::to_string(attributes_.rows()) + " rows, expected " +
                                  std::to_string(n));
    if (attributes_.cols() < 1)
      throw std::invalid_argument("network: attribute matrix needs at least one column");
    if (!attributes_.allFinite())
      throw std::invalid_argument("network: attribute matrix contains non-finite values");

    std::set<std::pair<int, int>> dedup;
    for (auto [u, v] : edge_list) {
      if (u < 0 || u >= n || v < 0 || v >= n)
        throw std::invalid_argument("network: edge endpoint out of range: (" +
                                    std::to_string(u) + ", " + std::to_string(v) + ")");
      if (u == v)
        throw std::invalid_argument("network: self-loop on node " + std::to_string(u));
      dedup.insert({std::min(u, v), std::max(u, v)});
    }
    edges_.assign(dedup.begin(), dedup.end());
    neighbors_.assign(n, {});
    for (auto [u, v] : edges_) {
      neighbors_[u].push_back(v);
      neighbors_[v].push_back(u);
    }
    for (auto& nb : neighbors_) std::sort(nb.begin(), nb.end());
    degrees_.resize(n);
    for (int i = 0; i < n; ++i) degrees_[i] = static_cast<int>(neighbors_[i].size());
  }

  int node_count() const { return node_count_; }
  int attr_count() const { return static_cast<int>(attributes_.cols()); }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  const Eigen::MatrixXd& attributes() const { return attributes_; }
  const std::vector<int>& neighbors(int v) const { return neighbors_[v]; }
  int degree(int v) const { return degrees_[v]; }
  const std::vector<int>& degrees() const { return degrees_; }

  // y = A x without materializing the adjacency matrix.
  Eigen::VectorXd adjacency_multiply(const Eigen::VectorXd& x) const {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(node_count_);
    for (auto [u, v] : edges_) {
      y[u] += x[v];
      y[v] += x[u];
    }
    return y;
  }

  AttributedNetwork with_attributes(Eigen::MatrixXd attrs) const {
    return AttributedNetwork(node_count_, edges_, std::move(attrs));
  }

 private:
  int node_count_;
  std::vector<std::pair<int, int>> edges_;
  Eigen::MatrixXd attributes_;
  std::vector<std::vector<int>> neighbors_;
  std::vector<int> degrees_;
};

namespace detail {

inline std::vector<std::pair<int, int>> parse_edge_file(const std::string& path, int* max_index) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open edge file '" + path + "'");
  std::vector<std::pair<int, int>> edges;
  std::string line;
  int lineno = 0;
  *max_index = -1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream is(line);
    long long u, v;
    if (!(is >> u >> v))
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": malformed edge line");
    std::string extra;
    if (is >> extra)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": unexpected trailing token '" + extra +
                               "' (weighted edges are not supported)");
    if (u < 0 || v < 0)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": negative node index");
    edges.emplace_back(static_cast<int>(u), static_cast<int>(v));
    *max_index = std::max(*max_index, static_cast<int>(std::max(u, v)));
  }
  return edges;
}

inline Eigen::MatrixXd parse_attribute_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open attribute file '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  bool first_content = true;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (!first_content && lineno > 1)
        continue;  // comments tolerated anywhere
      continue;
    }
    first_content = false;
    std::istringstream is(line);
    std::vector<double> row;
    double v;
    while (is >> v) row.push_back(v);
    if (!is.eof())
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": malformed value");
    if (row.empty()) continue;
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": row has " +
                               std::to_string(row.size()) + " values, expected " +
                               std::to_string(rows.front().size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error(path + ": empty attribute file");
  Eigen::MatrixXd W(rows.size(), rows.front().size());
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows.front().size(); ++j) W(i, j) = rows[i][j];
  return W;
}

}  // namespace detail

inline AttributedNetwork load_network(const std::string& edge_file,
                                      const std::string& attribute_file) {
  int max_index = -1;
  auto edges = detail::parse_edge_file(edge_file, &max_index);
  Eigen::MatrixXd W = detail::parse_attribute_file(attribute_file);
  int n = static_cast<int>(W.rows());
  if (max_index >= n)
    throw std::runtime_error("edge file references node " + std::to_string(max_index) +
                             " but attribute file has only " + std::to_string(n) + " rows");
  return AttributedNetwork(n, std::move(edges), std::move(W));
}

inline void save_network(const AttributedNetwork& net, const std::string& edge_file,
                         const std::string& attribute_file) {
  {
    std::ofstream f(edge_file);
    if (!f) throw std::runtime_error("cannot open '" + edge_file + "' for writing");
    f << "# undirected edge list, 0-based\n";
    for (auto [u, v] : net.edges()) f << u << ' ' << v << '\n';
  }
  {
    std::ofstream f(attribute_file);
    if (!f) throw std::runtime_error("cannot open '" + attribute_file + "' for writing");
    f.precision(17);
    f << "# " << net.node_count() << " rows x " << net.attr_count() << " attributes\n";
    for (int i = 0; i < net.node_count(); ++i) {
      for (int j = 0; j < net.attr_count(); ++j) {
        if (j) f << ' ';
        f << net.attributes()(i, j);
      }
      f << '\n';
    }
  }
}

inline Document network_summary(const AttributedNetwork& net) {
  Document doc;
  doc.set_int("nodes", net.node_count());
  doc.set_int("attributes", net.attr_count());
  doc.set_int("edges", net.edge_count());
  const auto& d = net.degrees();
  int dmin = *std::min_element(d.begin(), d.end());
  int dmax = *std::max_element(d.begin(), d.end());
  double dmean = 2.0 * net.edge_count() / net.node_count();
  doc.set_int("degree_min", dmin);
  doc.set_int("degree_max", dmax);
  doc.set_double("degree_mean", dmean);
  return doc;
}

// True iff the subgraph induced by s is connected (single BFS component).
inline bool induced_subgraph_connected(const AttributedNetwork& net, const IndexSet& s) {
  if (s.empty()) throw std::invalid_argument("induced_subgraph_connected: empty subset");
  for (int v : s)
    if (v < 0 || v >= net.node_count())
      throw std::invalid_argument("induced_subgraph_connected: index out of range");
  std::vector<char> in_s(net.node_count(), 0), seen(net.node_count(), 0);
  for (int v : s) in_s[v] = 1;
  std::vector<int> stack{s.front()};
  seen[s.front()] = 1;
  size_t count = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int w : net.neighbors(u)) {
      if (in_s[w] && !seen[w]) {
        seen[w] = 1;
        ++count;
        stack.push_back(w);
      }
    }
  }
  return count == s.size();
}

}  // namespace sgp

#endif
