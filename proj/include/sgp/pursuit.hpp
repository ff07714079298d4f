#ifndef SGP_PURSUIT_HPP
#define SGP_PURSUIT_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgp/graph.hpp"
#include "sgp/pcst.hpp"
#include "sgp/projection.hpp"
#include "sgp/rsc.hpp"
#include "sgp/score.hpp"
#include "sgp/textio.hpp"

namespace sgp {

struct CoefficientPair {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  IndexSet supp_x() const { return support_of(x); }
  IndexSet supp_y() const { return support_of(y); }
};

enum class InitMode { top_signal, zeros, random_feasible, coherent_seed };

inline const char* to_string(InitMode m) {
  switch (m) {
    case InitMode::top_signal: return "top-signal";
    case InitMode::zeros: return "zeros";
    case InitMode::random_feasible: return "random-feasible";
    case InitMode::coherent_seed: return "coherent-seed";
  }
  return "?";
}

struct SubproblemConfig {
  double pgd_step_init = 1.0;
  double pgd_backtrack_factor = 0.5;
  double pgd_tol = 1e-6;
  int pgd_max_iters = 1000;
};

struct PursuitConfig {
  int k = 1;
  int s = 1;
  double epsilon = 1e-4;
  int max_iters = 50;
  SubproblemConfig subproblem;
  InitMode init_mode = InitMode::top_signal;
  uint64_t rng_seed = 0;

  void validate(int n, int p) const {
    if (k < 1 || k > n) throw std::invalid_argument("pursuit config: k out of range");
    if (s < 1 || s > p) throw std::invalid_argument("pursuit config: s out of range");
    if (epsilon <= 0.0) throw std::invalid_argument("pursuit config: epsilon must be positive");
    if (max_iters < 0) throw std::invalid_argument("pursuit config: max_iters must be >= 0");
  }
};

struct PursuitState {
  CoefficientPair iterate;
  IndexSet gamma_x, gamma_y;
  IndexSet omega_x, omega_y;
  CoefficientPair b_pair;
  IndexSet psi_x, psi_y;
  int iter_index = 0;
  std::vector<double> objective_trace;
  std::vector<double> step_norm_trace;
};

struct SubspaceCluster {
  IndexSet nodes;
  IndexSet attributes;
  double score = 0.0;
  int iterations_used = 0;
  bool converged = false;
  std::vector<double> objective_trace;
  std::vector<double> step_norm_trace;
  int fallback_iterations = 0;  // head/tail degeneracy substitutions
  std::string diagnostic;
};

namespace pursuit_detail {

inline Eigen::VectorXd box_project(const Eigen::VectorXd& v, const IndexSet& supp,
                                   const BoxDomain& box) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(v.size());
  for (int i : supp) out[i] = box.clamp(v[i]);
  return out;
}

inline Eigen::VectorXd restrict_to(const Eigen::VectorXd& v, const IndexSet& supp) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(v.size());
  for (int i : supp) out[i] = v[i];
  return out;
}

// Top-k coordinates by |g| within the connected component holding the largest
// entry; used when a projection degenerates.
inline IndexSet component_top_k(const Eigen::VectorXd& g, int k, const AttributedNetwork& net) {
  int n = net.node_count();
  int best = 0;
  for (int i = 1; i < n; ++i)
    if (std::abs(g[i]) > std::abs(g[best])) best = i;
  std::vector<char> in(n, 0);
  std::vector<int> stack = {best}, comp;
  in[best] = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    comp.push_back(v);
    for (int w : net.neighbors(v))
      if (!in[w]) {
        in[w] = 1;
        stack.push_back(w);
      }
  }
  std::stable_sort(comp.begin(), comp.end(), [&](int a, int b) {
    double da = std::abs(g[a]), db = std::abs(g[b]);
    if (da != db) return da > db;
    return a < b;
  });
  if (static_cast<int>(comp.size()) > k) comp.resize(k);
  std::sort(comp.begin(), comp.end());
  return comp;
}

// Top-s of |b| with |g| as the tie key: box-clipped coordinates saturate at
// the same bound value, and the gradient magnitude still separates strong
// signals from coordinates that barely reached the bound.
inline IndexSet select_top_s(const Eigen::VectorXd& b, const Eigen::VectorXd& g, int s,
                             bool* degenerate) {
  const int p = static_cast<int>(b.size());
  std::vector<int> idx(p);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int c) {
    double ba = std::abs(b[a]), bc = std::abs(b[c]);
    if (ba != bc) return ba > bc;
    return std::abs(g[a]) > std::abs(g[c]);
  });
  idx.resize(std::min(s, p));
  if (degenerate) *degenerate = (b.cwiseAbs().maxCoeff() == 0.0);
  return make_index_set(std::move(idx));
}

// Gradient with the directions blocked by the box zeroed out: a coordinate
// pinned at a bound with the gradient pointing outward cannot move, so it
// should not compete for support selection either.
inline Eigen::VectorXd feasible_gradient(const Eigen::VectorXd& g, const Eigen::VectorXd& v,
                                         const BoxDomain& box) {
  Eigen::VectorXd out = g;
  for (int i = 0; i < g.size(); ++i) {
    if (v[i] <= box.lo && g[i] < 0.0) out[i] = 0.0;
    if (v[i] >= box.hi && g[i] > 0.0) out[i] = 0.0;
  }
  return out;
}

inline void check_finite(double v, const char* what, ScoreKind kind) {
  if (!std::isfinite(v))
    throw std::runtime_error(std::string("non-finite objective (") + what + ") for score " +
                             to_string(kind));
}

}  // namespace pursuit_detail

// Projected gradient ascent over the coordinates in (omega_x, omega_y);
// everything off-support stays pinned at zero. Monotone: the returned pair
// never scores below the warm start.
namespace pursuit_detail {

inline CoefficientPair pgd_ascent(const ScoreFunction& score, const IndexSet& omega_x,
                                  const IndexSet& omega_y, const CoefficientPair& warm,
                                  const SubproblemConfig& cfg) {
  BoxDomain bx = score.domain_x(), by = score.domain_y();
  Eigen::VectorXd x = pursuit_detail::box_project(warm.x, omega_x, bx);
  Eigen::VectorXd y = pursuit_detail::box_project(warm.y, omega_y, by);
  double fv = score.value(x, y);
  pursuit_detail::check_finite(fv, "warm start", score.kind());
  for (int it = 0; it < cfg.pgd_max_iters; ++it) {
    Eigen::VectorXd gx = pursuit_detail::restrict_to(score.grad_x(x, y), omega_x);
    Eigen::VectorXd gy = pursuit_detail::restrict_to(score.grad_y(x, y), omega_y);
    // Gradient mapping at unit step; zero exactly at a constrained
    // stationary point.
    Eigen::VectorXd mx = pursuit_detail::box_project(x + gx, omega_x, bx) - x;
    Eigen::VectorXd my = pursuit_detail::box_project(y + gy, omega_y, by) - y;
    if (std::sqrt(mx.squaredNorm() + my.squaredNorm()) <= cfg.pgd_tol) break;
    double step = cfg.pgd_step_init;
    bool moved = false;
    for (int bt = 0; bt < 60; ++bt) {
      Eigen::VectorXd nx = pursuit_detail::box_project(x + step * gx, omega_x, bx);
      Eigen::VectorXd ny = pursuit_detail::box_project(y + step * gy, omega_y, by);
      double nf = score.value(nx, ny);
      pursuit_detail::check_finite(nf, "line search", score.kind());
      if (nf > fv) {
        x = std::move(nx);
        y = std::move(ny);
        fv = nf;
        moved = true;
        break;
      }
      step *= cfg.pgd_backtrack_factor;
    }
    if (!moved) break;
  }
  return {std::move(x), std::move(y)};
}

}  // namespace pursuit_detail

// Every score reads W only through the rows in supp(x), so the ascent runs
// on the sub-network induced by omega_x (all attribute columns kept) and the
// result is scattered back; this is what keeps per-iteration cost independent
// of n.
inline CoefficientPair solve_restricted_subproblem(const ScoreFunction& score,
                                                   const IndexSet& omega_x,
                                                   const IndexSet& omega_y,
                                                   const CoefficientPair& warm,
                                                   const SubproblemConfig& cfg) {
  if (omega_x.empty() || omega_y.empty())
    throw std::invalid_argument("restricted subproblem: empty support set");
  const AttributedNetwork& net = score.net();
  const int n = net.node_count();
  const int m = static_cast<int>(omega_x.size());
  std::vector<int> local(n, -1);
  for (int i = 0; i < m; ++i) local[omega_x[i]] = i;
  std::vector<std::pair<int, int>> sub_edges;
  for (int i = 0; i < m; ++i)
    for (int w : net.neighbors(omega_x[i]))
      if (local[w] > i) sub_edges.emplace_back(i, local[w]);
  Eigen::MatrixXd W(m, net.attr_count());
  for (int i = 0; i < m; ++i) W.row(i) = net.attributes().row(omega_x[i]);
  AttributedNetwork subnet(m, std::move(sub_edges), std::move(W));
  auto sub_score = make_score(score.kind(), subnet, score.config());

  IndexSet local_all(m);
  std::iota(local_all.begin(), local_all.end(), 0);
  CoefficientPair sub_warm;
  sub_warm.x.resize(m);
  for (int i = 0; i < m; ++i) sub_warm.x[i] = warm.x[omega_x[i]];
  sub_warm.y = warm.y;
  CoefficientPair sub = pursuit_detail::pgd_ascent(*sub_score, local_all, omega_y, sub_warm, cfg);

  CoefficientPair out;
  out.x = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < m; ++i) out.x[omega_x[i]] = sub.x[i];
  out.y = std::move(sub.y);
  return out;
}

namespace pursuit_detail {

inline CoefficientPair initial_pair(const AttributedNetwork& net, const ScoreFunction& score,
                                    const PursuitConfig& cfg) {
  int n = net.node_count(), p = net.attr_count();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n), y = Eigen::VectorXd::Zero(p);
  switch (cfg.init_mode) {
    case InitMode::zeros:
      break;
    case InitMode::random_feasible: {
      std::mt19937_64 rng(cfg.rng_seed);
      IndexSet sx = rsc_detail::random_connected_support(net, cfg.k, rng);
      IndexSet sy = rsc_detail::random_subset(p, cfg.s, rng);
      for (int i : sx) x[i] = score.domain_x().bounded() ? 0.5 : 1.0;
      for (int j : sy) y[j] = score.domain_y().bounded() ? 0.5 : 1.0;
      break;
    }
    case InitMode::coherent_seed: {
      // Seed from the edge whose endpoints agree best on their s most
      // similar attributes; variance-penalized scores need a coherent
      // starting support or the penalty suffocates every coordinate.
      if (net.edge_count() == 0) {
        x[0] = 1.0;
        for (int j = 0; j < std::min(cfg.s, p); ++j) y[j] = 1.0;
        break;
      }
      const Eigen::MatrixXd& W = net.attributes();
      int s = std::min(cfg.s, p);
      // Sum of the s smallest within-set variances; the attrs realizing it
      // come out in picked_attrs.
      auto seed_cost = [&](const std::vector<int>& seed, std::vector<int>* picked_attrs) {
        std::vector<std::pair<double, int>> cost(p);
        for (int j = 0; j < p; ++j) {
          double mean = 0.0;
          for (int i : seed) mean += W(i, j);
          mean /= seed.size();
          double ss = 0.0;
          for (int i : seed) {
            double d = W(i, j) - mean;
            ss += d * d;
          }
          cost[j] = {ss, j};
        }
        std::partial_sort(cost.begin(), cost.begin() + s, cost.end());
        double total = 0.0;
        for (int i = 0; i < s; ++i) total += cost[i].first;
        if (picked_attrs) {
          picked_attrs->clear();
          for (int i = 0; i < s; ++i) picked_attrs->push_back(cost[i].second);
        }
        return total;
      };
      double best = std::numeric_limits<double>::infinity();
      std::vector<int> seed;
      for (auto [u, v] : net.edges()) {
        double c = seed_cost({u, v}, nullptr);
        if (c < best) {
          best = c;
          seed = {u, v};
        }
      }
      // A two-node seed can agree by chance on arbitrary attributes; a
      // handful of nodes votes those out.
      int target = std::min({cfg.k, n, 8});
      while (static_cast<int>(seed.size()) < target) {
        std::vector<char> in(n, 0);
        for (int i : seed) in[i] = 1;
        int best_node = -1;
        double best_c = std::numeric_limits<double>::infinity();
        for (int i : seed)
          for (int w : net.neighbors(i)) {
            if (in[w]) continue;
            in[w] = 1;  // dedup candidate evaluations
            std::vector<int> cand = seed;
            cand.push_back(w);
            double c = seed_cost(cand, nullptr);
            if (c < best_c) {
              best_c = c;
              best_node = w;
            }
          }
        if (best_node < 0) break;
        seed.push_back(best_node);
      }
      std::vector<int> attrs;
      seed_cost(seed, &attrs);
      for (int i : seed) x[i] = 1.0;
      for (int j : attrs) y[j] = 1.0;
      break;
    }
    case InitMode::top_signal: {
      const Eigen::MatrixXd& W = net.attributes();
      Eigen::VectorXd row_norm = W.rowwise().norm();
      std::vector<int> ni(n);
      std::iota(ni.begin(), ni.end(), 0);
      std::stable_sort(ni.begin(), ni.end(), [&](int a, int b) {
        if (row_norm[a] != row_norm[b]) return row_norm[a] > row_norm[b];
        return a < b;
      });
      for (int i = 0; i < cfg.k; ++i) x[ni[i]] = 1.0 / cfg.k;
      Eigen::RowVectorXd mean = W.colwise().mean();
      Eigen::VectorXd var(p);
      for (int j = 0; j < p; ++j) var[j] = (W.col(j).array() - mean[j]).square().mean();
      std::vector<int> pi(p);
      std::iota(pi.begin(), pi.end(), 0);
      std::stable_sort(pi.begin(), pi.end(), [&](int a, int b) {
        if (var[a] != var[b]) return var[a] > var[b];
        return a < b;
      });
      for (int j = 0; j < cfg.s; ++j) y[pi[j]] = 1.0 / cfg.s;
      break;
    }
  }
  return {std::move(x), std::move(y)};
}

}  // namespace pursuit_detail

inline SubspaceCluster sg_pursuit(const AttributedNetwork& net, const ScoreFunction& score,
                                  const TopologyConstraint& constraint, const PursuitConfig& cfg,
                                  PursuitState* state_out = nullptr) {
  int n = net.node_count(), p = net.attr_count();
  cfg.validate(n, p);
  constraint.validate(net);
  PursuitState st;
  st.iterate = pursuit_detail::initial_pair(net, score, cfg);
  SubspaceCluster result;
  auto finish = [&](bool converged, int iters, const std::string& diag) {
    result.nodes = st.iterate.supp_x();
    result.attributes = st.iterate.supp_y();
    result.score = score.value(st.iterate.x, st.iterate.y);
    result.iterations_used = iters;
    result.converged = converged;
    result.objective_trace = st.objective_trace;
    result.step_norm_trace = st.step_norm_trace;
    result.diagnostic = diag;
    if (state_out) *state_out = st;
    return result;
  };
  // settled PCST edge costs, reused across iterations (inputs change slowly)
  double head_lambda = 0.0, tail_lambda = 0.0;
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    st.iter_index = iter;
    Eigen::VectorXd gx = pursuit_detail::feasible_gradient(
        score.grad_x(st.iterate.x, st.iterate.y), st.iterate.x, score.domain_x());
    Eigen::VectorXd gy = pursuit_detail::feasible_gradient(
        score.grad_y(st.iterate.x, st.iterate.y), st.iterate.y, score.domain_y());
    if (gx.norm() == 0.0 && gy.norm() == 0.0) {
      bool at_stationary_point = !st.iterate.supp_x().empty() && !st.iterate.supp_y().empty();
      return finish(at_stationary_point, iter,
                    at_stationary_point ? "stationary point: no feasible ascent direction"
                                        : "all-zero gradient; nothing to pursue");
    }

    ProjectionResult head = head_project(gx, constraint, net, &head_lambda);
    st.gamma_x = head.support;
    if (head.degenerate || st.gamma_x.empty()) {
      st.gamma_x = pursuit_detail::component_top_k(gx, constraint.k, net);
      ++result.fallback_iterations;
    }
    bool deg_y = false;
    st.gamma_y = top_s_select(gy, std::min(2 * cfg.s, p), &deg_y);
    if (deg_y) ++result.fallback_iterations;

    st.omega_x = index_set_union(st.gamma_x, st.iterate.supp_x());
    st.omega_y = index_set_union(st.gamma_y, st.iterate.supp_y());
    if (st.omega_y.empty()) st.omega_y = top_s_select(Eigen::VectorXd::Ones(p), cfg.s, nullptr);

    st.b_pair =
        solve_restricted_subproblem(score, st.omega_x, st.omega_y, st.iterate, cfg.subproblem);

    ProjectionResult tail = tail_project(st.b_pair.x, constraint, net, &tail_lambda);
    st.psi_x = tail.support;
    if (tail.degenerate || st.psi_x.empty()) {
      st.psi_x = pursuit_detail::component_top_k(
          st.b_pair.x.cwiseAbs().sum() > 0.0 ? st.b_pair.x : gx, constraint.k, net);
      ++result.fallback_iterations;
    }
    bool deg_ty = false;
    st.psi_y = pursuit_detail::select_top_s(
        st.b_pair.y, score.grad_y(st.b_pair.x, st.b_pair.y), cfg.s, &deg_ty);
    if (deg_ty || st.psi_y.empty()) {
      st.psi_y = st.omega_y;
      if (static_cast<int>(st.psi_y.size()) > cfg.s) st.psi_y.resize(cfg.s);
      ++result.fallback_iterations;
    }

    Eigen::VectorXd nx = pursuit_detail::restrict_to(st.b_pair.x, st.psi_x);
    Eigen::VectorXd ny = pursuit_detail::restrict_to(st.b_pair.y, st.psi_y);
    double dx = (nx - st.iterate.x).norm();
    double dy = (ny - st.iterate.y).norm();
    st.iterate.x = std::move(nx);
    st.iterate.y = std::move(ny);
    st.objective_trace.push_back(score.value(st.iterate.x, st.iterate.y));
    st.step_norm_trace.push_back(std::sqrt(dx * dx + dy * dy));
    if (dx <= cfg.epsilon && dy <= cfg.epsilon) return finish(true, iter + 1, "");
  }
  return finish(false, cfg.max_iters, cfg.max_iters == 0 ? "max_iters=0; initial supports returned"
                                                         : "iteration cap reached");
}

enum class DeflationPolicy { column_mean_overwrite, remove_nodes };

inline const char* to_string(DeflationPolicy p) {
  return p == DeflationPolicy::column_mean_overwrite ? "column-mean-overwrite" : "remove-nodes";
}

// Repeated extraction. After each cluster (S, R) the working attribute matrix
// is deflated so the next run looks elsewhere: either W[S, R] is overwritten
// with the global column means, or the nodes S are dropped from the network
// (cluster indices are reported in original coordinates either way).
inline std::vector<SubspaceCluster> extract_top_k_clusters(
    const AttributedNetwork& net, ScoreKind kind, const ScoreConfig& score_cfg,
    const TopologyConstraint& constraint, const PursuitConfig& cfg, int top_k,
    DeflationPolicy deflate = DeflationPolicy::column_mean_overwrite) {
  if (top_k < 1) throw std::invalid_argument("extract_top_k_clusters: top_k must be >= 1");
  std::vector<SubspaceCluster> out;
  AttributedNetwork work = net;
  // to_original[i] maps the working network's node i to a node of `net`.
  std::vector<int> to_original(net.node_count());
  std::iota(to_original.begin(), to_original.end(), 0);
  for (int round = 0; round < top_k; ++round) {
    if (work.node_count() == 0) break;
    PursuitConfig round_cfg = cfg;
    round_cfg.k = std::min(cfg.k, work.node_count());
    round_cfg.s = std::min(cfg.s, work.attr_count());
    TopologyConstraint round_con = constraint;
    round_con.k = round_cfg.k;
    auto score = make_score(kind, work, score_cfg);
    SubspaceCluster c = sg_pursuit(work, *score, round_con, round_cfg);
    if (c.nodes.empty() || c.attributes.empty()) break;
    IndexSet local_nodes = c.nodes;
    for (int& v : c.nodes) v = to_original[v];
    std::sort(c.nodes.begin(), c.nodes.end());
    out.push_back(c);
    if (round + 1 == top_k) break;
    if (deflate == DeflationPolicy::column_mean_overwrite) {
      Eigen::MatrixXd W = work.attributes();
      for (int j : c.attributes) {
        double mean = W.col(j).mean();
        for (int i : local_nodes) W(i, j) = mean;
      }
      work = work.with_attributes(std::move(W));
    } else {
      std::vector<char> drop(work.node_count(), 0);
      for (int i : local_nodes) drop[i] = 1;
      std::vector<int> new_id(work.node_count(), -1), next_map;
      for (int i = 0; i < work.node_count(); ++i)
        if (!drop[i]) {
          new_id[i] = static_cast<int>(next_map.size());
          next_map.push_back(to_original[i]);
        }
      if (next_map.empty()) break;
      std::vector<std::pair<int, int>> edges;
      for (const auto& [u, v] : work.edges())
        if (!drop[u] && !drop[v]) edges.emplace_back(new_id[u], new_id[v]);
      Eigen::MatrixXd W(next_map.size(), work.attr_count());
      int r = 0;
      for (int i = 0; i < work.node_count(); ++i)
        if (!drop[i]) W.row(r++) = work.attributes().row(i);
      work = AttributedNetwork(static_cast<int>(next_map.size()), edges, std::move(W));
      to_original = std::move(next_map);
    }
  }
  return out;
}

// Step-norm contraction ratios plus, when constants are supplied, the
// theoretical convergence factors and the head/tail factor compatibility
// check c_H^2 > 1 - 1/(2(1+c_T)^2).
inline Document convergence_diagnostics(const std::vector<double>& step_norm_trace,
                                        const RscConstants* rsc = nullptr,
                                        double c_t = std::sqrt(7.0),
                                        double c_h = std::sqrt(1.0 / 14.0)) {
  Document doc;
  doc.set_array("step_norms", step_norm_trace);
  std::vector<double> ratios;
  for (size_t i = 1; i < step_norm_trace.size(); ++i) {
    double prev = step_norm_trace[i - 1];
    ratios.push_back(prev > 0.0 ? step_norm_trace[i] / prev : 0.0);
  }
  doc.set_array("shrinkage_ratios", ratios);
  double lhs = c_h * c_h;
  double rhs = 1.0 - 1.0 / (2.0 * (1.0 + c_t) * (1.0 + c_t));
  doc.set_double("factor_check_lhs", lhs);
  doc.set_double("factor_check_rhs", rhs);
  doc.set_int("factor_check_holds", lhs > rhs ? 1 : 0);
  if (rsc && rsc->applicable) {
    doc.set_double("alpha_rho_linear", rsc->alpha_linear);
    doc.set_double("beta_rho_linear", rsc->beta_linear);
    doc.set_double("alpha_rho_squared", rsc->alpha_squared);
    doc.set_double("beta_rho_squared", rsc->beta_squared);
    doc.set_int("alpha_below_one_rho_linear",
                (std::isfinite(rsc->alpha_linear) && rsc->alpha_linear < 1.0) ? 1 : 0);
    doc.set_int("alpha_below_one_rho_squared",
                (std::isfinite(rsc->alpha_squared) && rsc->alpha_squared < 1.0) ? 1 : 0);
  }
  return doc;
}

}  // namespace sgp

#endif
