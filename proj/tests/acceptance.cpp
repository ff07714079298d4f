// End-to-end acceptance gate. Each check prints a single pass/fail line with
// its wall time; the process exits nonzero if any check fails.
#include <chrono>
#include <cstdio>
#include <random>
#include <sstream>

#include "sgp/pursuit.hpp"
#include "sgp/rsc.hpp"
#include "sgp/synth.hpp"

using namespace sgp;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(const char* name, bool ok, double seconds, const std::string& detail) {
  std::printf("%s  %-28s %6.1fs  %s\n", ok ? "PASS" : "FAIL", name, seconds, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

AttributedNetwork random_net(int n, int p, double p_edge, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  std::bernoulli_distribution coin(p_edge);
  std::vector<std::pair<int, int>> edges;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (coin(rng)) edges.push_back({u, v});
  Eigen::MatrixXd W(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) W(i, j) = gauss(rng);
  return AttributedNetwork(n, std::move(edges), std::move(W));
}

Eigen::MatrixXd normalize_spectral(Eigen::MatrixXd W, double target_sq) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(W);
  return W * (std::sqrt(target_sq) / svd.singularValues()[0]);
}

// --- 1: analytic gradients vs central finite differences -------------------

void check_gradients() {
  auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> unif(0.1, 0.9);
  const int n = 6, p = 4;
  auto net = random_net(n, p, 0.5, rng);
  ScoreConfig cfg;
  cfg.response_c = Eigen::VectorXd::Ones(p);
  const double h = 1e-5, tol = 1e-5;
  int bad = 0, points = 0;
  for (auto kind : {ScoreKind::fisher, ScoreKind::elevated_mean, ScoreKind::coherence,
                    ScoreKind::coherence_density, ScoreKind::nsq_error, ScoreKind::logistic}) {
    auto f = make_score(kind, net, cfg);
    for (int pt = 0; pt < 100; ++pt) {
      Eigen::VectorXd x(n), y(p);
      for (int i = 0; i < n; ++i) x[i] = unif(rng);
      for (int j = 0; j < p; ++j) y[j] = unif(rng);
      ++points;
      Eigen::VectorXd gx = f->grad_x(x, y), gy = f->grad_y(x, y);
      for (int i = 0; i < n; ++i) {
        Eigen::VectorXd xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        double fd = (f->value(xp, y) - f->value(xm, y)) / (2 * h);
        if (std::abs(gx[i] - fd) > tol * std::max(1.0, std::abs(fd))) ++bad;
      }
      for (int j = 0; j < p; ++j) {
        Eigen::VectorXd yp = y, ym = y;
        yp[j] += h;
        ym[j] -= h;
        double fd = (f->value(x, yp) - f->value(x, ym)) / (2 * h);
        if (std::abs(gy[j] - fd) > tol * std::max(1.0, std::abs(fd))) ++bad;
      }
    }
  }
  double secs = seconds_since(t0);
  std::ostringstream d;
  d << bad << " mismatched components over " << points << " points, 6 scores";
  report("gradient-checks", bad == 0 && secs < 10.0, secs, d.str());
}

// --- 2: pcst projections vs the exhaustive oracle --------------------------

void check_projection_factors() {
  auto t0 = Clock::now();
  std::mt19937_64 rng(202);
  std::normal_distribution<double> gauss;
  const double c_h = std::sqrt(1.0 / 14.0), c_t = std::sqrt(7.0);
  int head_bad = 0, tail_bad = 0;
  for (int trial = 0; trial < 200; ++trial) {
    int n = 4 + static_cast<int>(rng() % 12);  // up to 15
    auto net = random_net(n, 1, 0.35, rng);
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x[i] = gauss(rng);
    int k = 1 + static_cast<int>(rng() % n);
    auto exact = exact_project_oracle(x, k, net, ProjectionMode::head);
    auto head = pcst_project(x, k, net, ProjectionMode::head);
    if (head.captured_mass < c_h * exact.captured_mass - 1e-9) ++head_bad;
    double total2 = x.squaredNorm();
    auto tail = pcst_project(x, k, net, ProjectionMode::tail);
    double res_exact = std::sqrt(std::max(0.0, total2 - exact.captured_mass * exact.captured_mass));
    double res_tail = std::sqrt(std::max(0.0, total2 - tail.captured_mass * tail.captured_mass));
    if (res_tail > c_t * res_exact + 1e-9) ++tail_bad;
  }
  double secs = seconds_since(t0);
  std::ostringstream d;
  d << head_bad << " head / " << tail_bad << " tail violations over 200 graphs";
  report("projection-factors", head_bad == 0 && tail_bad == 0 && secs < 60.0, secs, d.str());
}

// --- 3: sampled curvature ratios vs closed-form bounds ---------------------

void check_curvature_bounds() {
  auto t0 = Clock::now();
  std::mt19937_64 rng(303);
  TopologyConstraint constraint;
  constraint.k = 5;
  int violations = 0, scores_checked = 0;
  for (auto kind :
       {ScoreKind::fisher, ScoreKind::logistic, ScoreKind::elevated_mean, ScoreKind::nsq_error}) {
    auto base = random_net(12, 6, 0.3, rng);
    double target = kind == ScoreKind::nsq_error ? 4.0 : 0.36;
    auto net = base.with_attributes(normalize_spectral(base.attributes(), target));
    ScoreConfig cfg;
    cfg.response_c = Eigen::VectorXd::Zero(6);
    if (kind == ScoreKind::elevated_mean) cfg.r_sparsity = 2;
    auto bounds = lemma_constants(kind, net, cfg);
    if (!bounds.applicable) {
      ++violations;
      continue;
    }
    auto score = make_score(kind, net, cfg);
    auto rep = sample_rsc_rss(*score, net, constraint, 3, 1000, 404, &bounds);
    violations += static_cast<int>(rep.violations.size());
    ++scores_checked;
  }
  double secs = seconds_since(t0);
  std::ostringstream d;
  d << violations << " violations over " << scores_checked << " scores x 1000 samples";
  report("curvature-bounds", violations == 0 && scores_checked == 4 && secs < 30.0, secs, d.str());
}

// --- 4 + 6: coherent recovery and convergence behavior ---------------------

void check_coherent_recovery_and_convergence() {
  auto t0 = Clock::now();
  const int trials = 20;
  double node_f = 0.0, attr_f = 0.0;
  int eps_terminated = 0, contracting = 0;
  for (int trial = 0; trial < trials; ++trial) {
    CoherentSynthConfig sc;
    sc.rng_seed = trial_seed(1000, trial);
    auto [net, truth] = generate_coherent(sc);
    ScoreConfig scfg;
    scfg.lambda = 5.0;
    scfg.sigma = 0.01;
    auto score = make_score(ScoreKind::coherence_density, net, scfg);
    TopologyConstraint c;
    c.k = 30;
    c.backend = ProjectionBackend::pcst_approx;
    PursuitConfig cfg;
    cfg.k = 30;
    cfg.s = 10;
    cfg.init_mode = InitMode::coherent_seed;
    auto cl = sg_pursuit(net, *score, c, cfg);
    node_f += f_measure(truth.nodes, cl.nodes).f;
    attr_f += f_measure(truth.attributes, cl.attributes).f;
    if (cl.converged && cl.iterations_used <= cfg.max_iters) ++eps_terminated;
    const auto& tr = cl.step_norm_trace;
    bool shrinks = true;
    for (size_t i = tr.size() / 2; i + 1 < tr.size(); ++i)
      if (tr[i] > 0.0 && tr[i + 1] / tr[i] >= 1.0) shrinks = false;
    if (shrinks) ++contracting;
  }
  node_f /= trials;
  attr_f /= trials;
  double secs = seconds_since(t0);
  {
    std::ostringstream d;
    d << "node_f=" << node_f << " attr_f=" << attr_f << " over " << trials << " seeds";
    report("coherent-recovery", node_f >= 0.70 && attr_f >= 0.70 && secs < 300.0, secs, d.str());
  }
  {
    std::ostringstream d;
    d << eps_terminated << "/" << trials << " tolerance-terminated, " << contracting << "/"
      << trials << " contracting step norms";
    report("convergence-behavior",
           eps_terminated == trials && contracting >= (9 * trials + 9) / 10, secs, d.str());
  }
}

// --- 5: anomalous recovery plus the null guard -----------------------------

void check_anomalous_recovery() {
  auto t0 = Clock::now();
  const int trials = 20;
  auto run_batch = [&](double mu, double& nf_out, double& af_out) {
    double nf = 0.0, af = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
      AnomalySynthConfig sc;
      sc.signal_mu = mu;
      sc.rng_seed = trial_seed(2000 + static_cast<uint64_t>(mu * 100), trial);
      auto [net, truth] = generate_anomalous(sc);
      auto score = make_score(ScoreKind::elevated_mean, net);
      TopologyConstraint c;
      c.k = 30;
      c.backend = ProjectionBackend::pcst_approx;
      PursuitConfig cfg;
      cfg.k = 30;
      cfg.s = 5;
      auto cl = sg_pursuit(net, *score, c, cfg);
      nf += f_measure(truth.nodes, cl.nodes).f;
      af += f_measure(truth.attributes, cl.attributes).f;
    }
    nf_out = nf / trials;
    af_out = af / trials;
  };
  double nf = 0, af = 0, null_nf = 0, null_af = 0;
  run_batch(3.0, nf, af);
  run_batch(0.0, null_nf, null_af);
  double secs = seconds_since(t0);
  std::ostringstream d;
  d << "node_f=" << nf << " attr_f=" << af << " null node_f=" << null_nf;
  report("anomalous-recovery",
         nf >= 0.8 && af >= 0.8 && null_nf < 0.3 && secs < 300.0, secs, d.str());
}

// --- 7: wall-time scaling in n and in p ------------------------------------

void check_scaling() {
  auto t0 = Clock::now();
  const double limit = 2.6;
  const std::pair<int, int> sizes[] = {{2000, 50}, {4000, 50}, {8000, 50}, {2000, 100}, {2000, 200}};
  const int n_sizes = 5, trials = 5, sweeps = 10;

  auto detect_ms = [](const AttributedNetwork& net) {
    auto score = make_score(ScoreKind::elevated_mean, net);
    TopologyConstraint c;
    c.k = 30;
    c.backend = ProjectionBackend::pcst_approx;
    PursuitConfig cfg;
    cfg.k = 30;
    cfg.s = 5;
    auto t = Clock::now();
    auto cl = sg_pursuit(net, *score, c, cfg);
    double ms = 1000.0 * seconds_since(t);
    return cl.nodes.empty() ? 1e9 : ms;  // a vacuous run would invalidate the timing
  };

  // Detection is deterministic, so the minimum over repeated sweeps estimates
  // each instance's true cost. Every visit regenerates its one network and
  // times it in isolation, keeping the resident set identical for all sizes,
  // and a transient load spike must outlast the whole experiment to bias one
  // size. The first sweep only warms up caches and the allocator.
  std::vector<double> best(static_cast<size_t>(n_sizes) * trials, 1e18);
  for (int sweep = 0; sweep < sweeps; ++sweep)
    for (int s = 0; s < n_sizes; ++s)
      for (int trial = 0; trial < trials; ++trial) {
        AnomalySynthConfig sc;
        sc.n = sizes[s].first;
        sc.p = sizes[s].second;
        sc.rng_seed = trial_seed(7000, trial);  // same instance stream at every size
        double ms = detect_ms(generate_anomalous(sc).first);
        if (sweep > 0) best[s * trials + trial] = std::min(best[s * trials + trial], ms);
      }
  std::vector<double> med(n_sizes);
  for (int s = 0; s < n_sizes; ++s) {
    std::vector<double> ms(best.begin() + s * trials, best.begin() + (s + 1) * trials);
    std::sort(ms.begin(), ms.end());
    med[s] = ms[trials / 2];
  }
  double n2 = med[0], n4 = med[1], n8 = med[2], p1 = med[3], p2 = med[4];
  double rn1 = n4 / n2, rn2 = n8 / n4;
  double rp1 = p1 / n2, rp2 = p2 / p1;
  double secs = seconds_since(t0);
  std::ostringstream d;
  d.precision(3);
  d << "n-doubling x" << rn1 << ", x" << rn2 << "; p-doubling x" << rp1 << ", x" << rp2;
  report("near-linear-scaling",
         rn1 <= limit && rn2 <= limit && rp1 <= limit && rp2 <= limit, secs, d.str());
}

// --- 8: determinism and file round-trips -----------------------------------

void check_determinism_roundtrips() {
  auto t0 = Clock::now();
  bool ok = true;

  AnomalySynthConfig sc;
  sc.n = 120;
  sc.p = 15;
  sc.cluster_size = 10;
  sc.n_attrs_anomalous = 3;
  sc.rng_seed = 55;
  auto [net, truth] = generate_anomalous(sc);
  auto [net2, truth2] = generate_anomalous(sc);
  ok = ok && net.edges() == net2.edges() && (net.attributes() - net2.attributes()).norm() == 0.0 &&
       truth.nodes == truth2.nodes && truth.attributes == truth2.attributes;

  save_network(net, "acc_edges.tmp", "acc_attrs.tmp");
  auto back = load_network("acc_edges.tmp", "acc_attrs.tmp");
  ok = ok && back.edges() == net.edges() && (back.attributes() - net.attributes()).norm() == 0.0;

  Document meta;
  meta.set("task", "anomalous");
  save_truth(truth, meta, "acc_truth.tmp");
  auto truth_back = load_truth("acc_truth.tmp");
  ok = ok && truth_back.nodes == truth.nodes && truth_back.attributes == truth.attributes;

  Document doc;
  doc.set("score", "elevated-mean");
  doc.set_double("epsilon", 1e-4);
  doc.set_array("trace", std::vector<double>{1.0, 0.123456789012345, 1e-300});
  doc.save("acc_doc.tmp");
  ok = ok && Document::load("acc_doc.tmp").to_string() == doc.to_string();

  auto score = make_score(ScoreKind::elevated_mean, net);
  TopologyConstraint c;
  c.k = 10;
  c.backend = ProjectionBackend::pcst_approx;
  PursuitConfig cfg;
  cfg.k = 10;
  cfg.s = 3;
  auto a = sg_pursuit(net, *score, c, cfg);
  auto b = sg_pursuit(net, *score, c, cfg);
  ok = ok && a.nodes == b.nodes && a.attributes == b.attributes && a.score == b.score;

  for (const char* f : {"acc_edges.tmp", "acc_attrs.tmp", "acc_truth.tmp", "acc_doc.tmp"})
    std::remove(f);
  report("determinism-roundtrips", ok, seconds_since(t0),
         "generator, network, truth, document, detection");
}

}  // namespace

int main() {
  check_gradients();
  check_projection_factors();
  check_curvature_bounds();
  check_coherent_recovery_and_convergence();
  check_anomalous_recovery();
  check_scaling();
  check_determinism_roundtrips();
  if (g_failures) std::printf("%d check(s) failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
