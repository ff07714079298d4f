#ifndef SGP_RSC_HPP
#define SGP_RSC_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgp/graph.hpp"
#include "sgp/projection.hpp"
#include "sgp/score.hpp"
#include "sgp/textio.hpp"

namespace sgp {

// Curvature sandwich constants for a score function, either from the closed
// formulas (when the spectral preconditions hold) or from sampling.
struct RscConstants {
  double gamma_minus = 0.0;
  double gamma_plus = 0.0;
  double b0 = 0.0;  // largest eigenvalue of W W'
  double b1 = 0.0;  // largest eigenvalue of W' W
  // Two rho conventions are in circulation; both are carried through to
  // alpha/beta so reports can show the gap instead of hiding it.
  double rho_linear = 0.0;     // sqrt(1 - gm/gp)
  double rho_squared = 0.0;    // sqrt(1 - (gm/gp)^2)
  double alpha0_linear = 0.0, beta0_linear = 0.0;
  double alpha_linear = 0.0, beta_linear = 0.0;
  double alpha0_squared = 0.0, beta0_squared = 0.0;
  double alpha_squared = 0.0, beta_squared = 0.0;
  double delta = std::numeric_limits<double>::quiet_NaN();  // gp/2 - 1, nsq only
  bool applicable = false;
  std::string note;  // reason when not applicable
  std::string source = "lemma-formula";
};

inline std::pair<double, double> spectral_bounds(const AttributedNetwork& net) {
  const Eigen::MatrixXd& W = net.attributes();
  if (W.size() == 0 || W.norm() == 0.0) return {0.0, 0.0};
  // Power iteration on W'W via v -> W'(Wv); top eigenvalue equals ||W||^2 and
  // is shared by WW'.
  Eigen::VectorXd v = Eigen::VectorXd::Ones(W.cols());
  v.normalize();
  double lam = 0.0;
  bool converged = false;
  for (int it = 0; it < 10000; ++it) {
    Eigen::VectorXd u = W.transpose() * (W * v);
    double nrm = u.norm();
    if (nrm == 0.0) return {0.0, 0.0};
    u /= nrm;
    double next = (W * u).squaredNorm();
    if (std::abs(next - lam) <= 1e-8 * std::max(1.0, std::abs(next))) {
      lam = next;
      converged = true;
      break;
    }
    lam = next;
    v = std::move(u);
  }
  if (!converged) throw std::runtime_error("spectral_bounds: power iteration did not converge");
  return {lam, lam};
}

namespace rsc_detail {

inline void fill_theorem_constants(RscConstants& c, double c_t, double c_h) {
  auto derive = [&](double rho, double& a0, double& b0v, double& a, double& b) {
    a0 = c_h * (1.0 - rho) - rho;
    b0v = (c_h + 1.0) * c.gamma_minus / (c.gamma_plus * c.gamma_plus);
    double denom = 1.0 - std::sqrt(2.0) * rho;
    if (denom <= 0.0 || a0 <= 0.0 || a0 >= 1.0) {
      a = b = std::numeric_limits<double>::quiet_NaN();
      return;
    }
    a = (c_t + 1.0) * std::sqrt(2.0 - 2.0 * a0 * a0) / denom;
    b = (c_t + 1.0) / denom *
        (c.gamma_minus / (c.gamma_plus * c.gamma_plus) +
         std::sqrt(2.0) * a0 * b0v / (1.0 - a0 * a0) + std::sqrt(2.0) * b0v / a0);
  };
  double r = c.gamma_minus / c.gamma_plus;
  c.rho_linear = std::sqrt(std::max(0.0, 1.0 - r));
  c.rho_squared = std::sqrt(std::max(0.0, 1.0 - r * r));
  derive(c.rho_linear, c.alpha0_linear, c.beta0_linear, c.alpha_linear, c.beta_linear);
  derive(c.rho_squared, c.alpha0_squared, c.beta0_squared, c.alpha_squared, c.beta_squared);
}

}  // namespace rsc_detail

inline RscConstants lemma_constants(ScoreKind kind, const AttributedNetwork& net,
                                    const ScoreConfig& cfg, double c_t = std::sqrt(7.0),
                                    double c_h = std::sqrt(1.0 / 14.0)) {
  auto [b0, b1] = spectral_bounds(net);
  RscConstants c;
  c.b0 = b0;
  c.b1 = b1;
  switch (kind) {
    case ScoreKind::nsq_error: {
      double b = b0;
      c.gamma_minus = 1.0;
      c.gamma_plus = std::max(2.0 * b + 2.0 * std::sqrt(b) + 1.0, 3.0 + 2.0 * std::sqrt(b));
      c.delta = c.gamma_plus / 2.0 - 1.0;
      c.applicable = true;
      break;
    }
    case ScoreKind::fisher:
    case ScoreKind::logistic:
    case ScoreKind::elevated_mean: {
      // these formulas take the spectral norm of the (effective) attribute
      // matrix, not its square: the bilinear term's curvature edges are
      // 1 +- sigma
      double s0 = std::sqrt(b0), s1 = std::sqrt(b1);
      if (kind == ScoreKind::elevated_mean) {
        s0 /= std::sqrt(static_cast<double>(cfg.r_sparsity));
        s1 /= std::sqrt(static_cast<double>(cfg.r_sparsity));
      }
      if (s0 >= 1.0 || s1 >= 1.0) {
        c.applicable = false;
        c.note = "spectral bound " + std::to_string(std::max(s0, s1)) +
                 " >= 1; normalize W (or raise r_sparsity) to apply the bound formulas";
        return c;
      }
      c.gamma_minus = std::min(1.0 - s0, 1.0 - s1);
      if (kind == ScoreKind::logistic)
        c.gamma_plus = std::max(2.0 * s0 + 1.0, 2.0);
      else
        c.gamma_plus = 2.0;
      c.applicable = true;
      break;
    }
    case ScoreKind::coherence:
    case ScoreKind::coherence_density:
      c.applicable = false;
      c.note = "no closed-form constants for this score; empirical sampling only";
      return c;
  }
  rsc_detail::fill_theorem_constants(c, c_t, c_h);
  return c;
}

struct RscSample {
  double ratio = 0.0;
  int trial = -1;
};

struct RscSampleReport {
  double empirical_gamma_minus = std::numeric_limits<double>::infinity();
  double empirical_gamma_plus = -std::numeric_limits<double>::infinity();
  int trials = 0;
  std::vector<RscSample> violations;  // vs supplied lemma bounds, 1e-9 slack
};

namespace rsc_detail {

inline IndexSet random_connected_support(const AttributedNetwork& net, int max_size,
                                         std::mt19937_64& rng) {
  int n = net.node_count();
  std::uniform_int_distribution<int> pick(0, n - 1);
  int start = pick(rng);
  std::vector<char> in(n, 0);
  IndexSet out;
  out.push_back(start);
  in[start] = 1;
  int cur = start;
  int steps = 0, limit = 100 * n;
  while (static_cast<int>(out.size()) < max_size && steps++ < limit) {
    const auto& nb = net.neighbors(cur);
    if (nb.empty()) break;
    cur = nb[std::uniform_int_distribution<size_t>(0, nb.size() - 1)(rng)];
    if (!in[cur]) {
      in[cur] = 1;
      out.push_back(cur);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline IndexSet random_subset(int p, int max_size, std::mt19937_64& rng) {
  std::vector<int> idx(p);
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  int m = std::min(p, std::max(1, max_size));
  idx.resize(m);
  std::sort(idx.begin(), idx.end());
  return idx;
}

inline Eigen::VectorXd random_on_support(int dim, const IndexSet& supp, const BoxDomain& box,
                                         std::mt19937_64& rng) {
  double lo = box.bounded() ? box.lo : -1.0;
  double hi = box.bounded() ? box.hi : 1.0;
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
  for (int i : supp) v[i] = u(rng);
  return v;
}

// Rescale the support entries to a fixed sum; used for the elevated-mean
// score, whose bound formulas hold on a constant-sum slice.
inline void force_sum(Eigen::VectorXd& v, const IndexSet& supp, double target,
                      std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.1, 1.0);
  double s = 0.0;
  for (int i : supp) {
    v[i] = u(rng);
    s += v[i];
  }
  for (int i : supp) v[i] *= target / s;
}

}  // namespace rsc_detail

// Samples the Definition's sandwich ratio
//   [f(x,y) - f(x',y') - grad_x(x,y)'(x-x') - grad_y(x,y)'(y-y')] /
//   [ (||x-x'||^2 + ||y-y'||^2) / 2 ]
// over random connected supports of size <= 2k and attribute supports of
// size <= 2s, and flags samples outside [bounds.gamma_minus - slack,
// bounds.gamma_plus + slack] when bounds.applicable.
inline RscSampleReport sample_rsc_rss(const ScoreFunction& score, const AttributedNetwork& net,
                                      const TopologyConstraint& constraint, int s, int trials,
                                      uint64_t rng_seed, const RscConstants* bounds = nullptr) {
  if (trials < 1) throw std::invalid_argument("sample_rsc_rss: trials must be >= 1");
  std::mt19937_64 rng(rng_seed);
  RscSampleReport rep;
  bool fixed_sum = score.kind() == ScoreKind::elevated_mean;
  double slice_sum = static_cast<double>(score.config().r_sparsity);
  int n = net.node_count(), p = net.attr_count();
  for (int t = 0; t < trials; ++t) {
    IndexSet sx = rsc_detail::random_connected_support(net, 2 * constraint.k, rng);
    IndexSet sy = rsc_detail::random_subset(p, 2 * s, rng);
    Eigen::VectorXd x, x2, y, y2;
    double dn = 0.0;
    for (int attempt = 0; attempt < 50; ++attempt) {
      x = rsc_detail::random_on_support(n, sx, score.domain_x(), rng);
      x2 = rsc_detail::random_on_support(n, sx, score.domain_x(), rng);
      if (fixed_sum) {
        rsc_detail::force_sum(x, sx, slice_sum, rng);
        rsc_detail::force_sum(x2, sx, slice_sum, rng);
      }
      y = rsc_detail::random_on_support(p, sy, score.domain_y(), rng);
      y2 = rsc_detail::random_on_support(p, sy, score.domain_y(), rng);
      dn = (x - x2).squaredNorm() + (y - y2).squaredNorm();
      if (dn > 1e-12) break;
    }
    if (dn <= 1e-12) continue;
    double mid = score.value(x, y) - score.value(x2, y2) -
                 score.grad_x(x, y).dot(x - x2) - score.grad_y(x, y).dot(y - y2);
    double ratio = mid / (0.5 * dn);
    rep.empirical_gamma_minus = std::min(rep.empirical_gamma_minus, ratio);
    rep.empirical_gamma_plus = std::max(rep.empirical_gamma_plus, ratio);
    ++rep.trials;
    if (bounds && bounds->applicable) {
      if (ratio < bounds->gamma_minus - 1e-9 || ratio > bounds->gamma_plus + 1e-9)
        rep.violations.push_back({ratio, t});
    }
  }
  return rep;
}

inline Document rsc_report(ScoreKind kind, const RscConstants& c, const RscSampleReport* samp) {
  Document doc;
  doc.set("score", to_string(kind));
  doc.set("source", c.source);
  doc.set_int("lemma_applicable", c.applicable ? 1 : 0);
  if (!c.note.empty()) doc.set("note", c.note);
  doc.set_double("b0", c.b0);
  doc.set_double("b1", c.b1);
  if (c.applicable) {
    doc.set_double("gamma_minus", c.gamma_minus);
    doc.set_double("gamma_plus", c.gamma_plus);
    doc.set_double("rho_linear", c.rho_linear);
    doc.set_double("rho_squared", c.rho_squared);
    doc.set_double("alpha_rho_linear", c.alpha_linear);
    doc.set_double("beta_rho_linear", c.beta_linear);
    doc.set_double("alpha_rho_squared", c.alpha_squared);
    doc.set_double("beta_rho_squared", c.beta_squared);
    if (std::isfinite(c.delta)) doc.set_double("delta", c.delta);
  }
  if (samp) {
    doc.set_int("sample_trials", samp->trials);
    doc.set_double("empirical_gamma_minus", samp->empirical_gamma_minus);
    doc.set_double("empirical_gamma_plus", samp->empirical_gamma_plus);
    doc.set_int("violations", static_cast<int>(samp->violations.size()));
    if (!samp->violations.empty()) {
      std::vector<double> v;
      for (const auto& bad : samp->violations) v.push_back(bad.ratio);
      doc.set_array("violation_ratios", v);
    }
  }
  return doc;
}

}  // namespace sgp

#endif
