#ifndef SGP_PROJECTION_HPP
#define SGP_PROJECTION_HPP

#include <Eigen/Dense>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "sgp/graph.hpp"

namespace sgp {

enum class ProjectionBackend { exact, pcst_approx };
enum class ProjectionMode { head, tail };

inline const char* to_string(ProjectionBackend b) {
  return b == ProjectionBackend::exact ? "exact" : "pcst";
}

// Model M(k): connected induced subgraphs of at most k nodes, plus the
// projection backend that realizes the head/tail oracles.
struct TopologyConstraint {
  int k = 1;
  ProjectionBackend backend = ProjectionBackend::exact;
  int exact_cap = 15;  // refuse exhaustive enumeration above this many nodes

  double tail_factor() const {
    return backend == ProjectionBackend::exact ? 1.0 : std::sqrt(7.0);
  }
  double head_factor() const {
    return backend == ProjectionBackend::exact ? 1.0 : std::sqrt(1.0 / 14.0);
  }

  void validate(const AttributedNetwork& net) const {
    if (k < 1 || k > net.node_count())
      throw std::invalid_argument("topology constraint: k must be in [1, n]");
  }
};

struct ProjectionResult {
  IndexSet support;
  double captured_mass = 0.0;  // ||x_S||_2
  ProjectionBackend backend_used = ProjectionBackend::exact;
  int relaxed_budget = 0;  // size bound actually guaranteed by the backend
  bool degenerate = false;
};

// Indices of the s largest-magnitude entries; ties go to the lower index.
inline IndexSet top_s_select(const Eigen::VectorXd& v, int s, bool* degenerate = nullptr) {
  const int p = static_cast<int>(v.size());
  if (s < 1 || s > p) throw std::invalid_argument("top_s_select: s must be in [1, p]");
  std::vector<int> idx(p);
  for (int i = 0; i < p; ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return std::abs(v[a]) > std::abs(v[b]);
  });
  idx.resize(s);
  if (degenerate) *degenerate = (v.cwiseAbs().maxCoeff() == 0.0);
  return make_index_set(std::move(idx));
}

namespace detail {

// Enumerate every connected induced subgraph with <= k nodes exactly once
// (ESU expansion anchored at the smallest node of each subgraph). Bitmask
// representation; only valid for n <= 31, which the oracle cap enforces.
inline void enumerate_connected_subsets(const AttributedNetwork& net, int k,
                                        const std::function<void(uint32_t)>& emit) {
  const int n = net.node_count();
  std::vector<uint32_t> nbr(n, 0);
  for (int v = 0; v < n; ++v)
    for (int u : net.neighbors(v)) nbr[v] |= 1u << u;

  std::function<void(uint32_t, uint32_t, uint32_t, uint32_t, int)> extend =
      [&](uint32_t sub, uint32_t ext, uint32_t closed, uint32_t gt_anchor, int size) {
        emit(sub);
        if (size == k) return;
        while (ext) {
          uint32_t wbit = ext & (~ext + 1);
          ext &= ~wbit;
          int w = std::countr_zero(wbit);
          uint32_t grow = nbr[w] & gt_anchor & ~closed;
          extend(sub | wbit, ext | grow, closed | nbr[w] | wbit, gt_anchor, size + 1);
        }
      };

  for (int v = 0; v < n; ++v) {
    uint32_t gt_anchor = (v + 1 >= 32) ? 0u : ~((1u << (v + 1)) - 1u);
    uint32_t vbit = 1u << v;
    extend(vbit, nbr[v] & gt_anchor, vbit | nbr[v], gt_anchor, 1);
  }
}

inline IndexSet bits_to_set(uint32_t mask) {
  IndexSet out;
  while (mask) {
    out.push_back(std::countr_zero(mask));
    mask &= mask - 1;
  }
  return out;
}

}  // namespace detail

// Exhaustive optimum of the head/tail objective over all connected subsets of
// size <= k. Head and tail share the argmax of ||x_S||_2; they differ only in
// tie-breaking (head prefers larger supports, tail smaller).
inline ProjectionResult exact_project_oracle(const Eigen::VectorXd& x, int k,
                                             const AttributedNetwork& net, ProjectionMode mode,
                                             int cap = 15) {
  const int n = net.node_count();
  if (static_cast<int>(x.size()) != n)
    throw std::invalid_argument("exact_project_oracle: vector length mismatch");
  if (!x.allFinite()) throw std::invalid_argument("exact_project_oracle: non-finite input");
  if (n > cap || n > 31)
    throw std::runtime_error("exact_project_oracle: n=" + std::to_string(n) +
                             " exceeds enumeration cap " + std::to_string(std::min(cap, 31)));
  if (k < 1 || k > n) throw std::invalid_argument("exact_project_oracle: k out of range");

  ProjectionResult res;
  res.backend_used = ProjectionBackend::exact;
  res.relaxed_budget = k;
  if (x.cwiseAbs().maxCoeff() == 0.0) {
    res.degenerate = true;
    return res;
  }

  double best_mass2 = -1.0;
  IndexSet best;
  const double tol = 1e-12;
  detail::enumerate_connected_subsets(net, k, [&](uint32_t mask) {
    double mass2 = 0.0;
    for (uint32_t m = mask; m; m &= m - 1) {
      int v = std::countr_zero(m);
      mass2 += x[v] * x[v];
    }
    bool better = false;
    if (mass2 > best_mass2 + tol) {
      better = true;
    } else if (mass2 > best_mass2 - tol) {
      // tie: head prefers the larger support, tail the smaller; then the
      // lexicographically smallest sorted node set
      IndexSet cand = detail::bits_to_set(mask);
      if (mode == ProjectionMode::head) {
        if (cand.size() > best.size() || (cand.size() == best.size() && cand < best)) better = true;
      } else {
        if (cand.size() < best.size() || (cand.size() == best.size() && cand < best)) better = true;
      }
    }
    if (better) {
      best_mass2 = std::max(best_mass2, mass2);
      best = detail::bits_to_set(mask);
    }
  });

  res.support = std::move(best);
  double mass2 = 0.0;
  for (int v : res.support) mass2 += x[v] * x[v];
  res.captured_mass = std::sqrt(mass2);
  return res;
}

}  // namespace sgp

#endif
