// Command-line front end: generate | detect | evaluate | verify-rsc | bench.
// All outputs are line-oriented key-value documents; see README for formats.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sgp/graph.hpp"
#include "sgp/pcst.hpp"
#include "sgp/pursuit.hpp"
#include "sgp/rsc.hpp"
#include "sgp/score.hpp"
#include "sgp/synth.hpp"
#include "sgp/textio.hpp"

namespace fs = std::filesystem;

namespace {

int log_level() {
  static int level = [] {
    const char* env = std::getenv("SGP_LOG_LEVEL");
    std::string s = env ? env : "warn";
    if (s == "error") return 0;
    if (s == "warn") return 1;
    if (s == "info") return 2;
    if (s == "debug") return 3;
    return 1;
  }();
  return level;
}

void log_at(int level, const std::string& msg) {
  static const char* names[] = {"error", "warn", "info", "debug"};
  if (level <= log_level()) std::cerr << "[" << names[level] << "] " << msg << "\n";
}

std::string timestamp() {
  auto now = std::chrono::system_clock::now().time_since_epoch();
  return std::to_string(std::chrono::duration_cast<std::chrono::seconds>(now).count());
}

// Flags beat config-document values beat built-in defaults. An option that
// the user typed has count() > 0; otherwise we look in the document.
template <typename T>
void apply_config(const CLI::Option* opt, const sgp::Document& doc, const std::string& key,
                  T& value) {
  if (opt && opt->count() > 0) return;
  if (!doc.has(key)) return;
  if constexpr (std::is_same_v<T, std::string>)
    value = doc.get(key);
  else if constexpr (std::is_integral_v<T>)
    value = static_cast<T>(doc.get_int(key));
  else
    value = static_cast<T>(doc.get_double(key));
}

struct DetectOptions {
  std::string net_file, attrs_file, out_file = "result.txt", config_file;
  std::string score = "coherence", backend = "pcst";
  int k = 30, s = 10, top_k = 1;
  long long seed = 0;
  double epsilon = 1e-4, lambda = 5.0, sigma = 0.01;
  int max_iters = 50;
};

void echo_common(sgp::Document& doc, const DetectOptions& o) {
  doc.set("score", o.score);
  doc.set("backend", o.backend);
  doc.set_int("k", o.k);
  doc.set_int("s", o.s);
  doc.set_int("top_k", o.top_k);
  doc.set_int("seed", o.seed);
  doc.set_double("epsilon", o.epsilon);
  doc.set_int("max_iters", o.max_iters);
  doc.set_double("lambda", o.lambda);
  doc.set_double("sigma", o.sigma);
}

int run_detect_into(const DetectOptions& o, sgp::Document& doc) {
  sgp::AttributedNetwork net = sgp::load_network(o.net_file, o.attrs_file);
  log_at(2, "loaded network: " + std::to_string(net.node_count()) + " nodes, " +
                std::to_string(net.attr_count()) + " attributes");
  sgp::TopologyConstraint con;
  con.k = std::min(o.k, net.node_count());
  con.backend = o.backend == "exact" ? sgp::ProjectionBackend::exact
                                     : sgp::ProjectionBackend::pcst_approx;
  if (con.backend == sgp::ProjectionBackend::exact && net.node_count() > con.exact_cap)
    throw std::runtime_error("exact backend enumerates all connected subsets and is capped at n <= " +
                             std::to_string(con.exact_cap) + "; use --backend pcst for n = " +
                             std::to_string(net.node_count()));
  sgp::PursuitConfig cfg;
  cfg.k = con.k;
  cfg.s = std::min(o.s, net.attr_count());
  cfg.epsilon = o.epsilon;
  cfg.max_iters = o.max_iters;
  cfg.rng_seed = static_cast<uint64_t>(o.seed);
  sgp::ScoreConfig scfg;
  scfg.lambda = o.lambda;
  scfg.sigma = o.sigma;
  sgp::ScoreKind kind = sgp::score_kind_from_string(o.score);
  if (kind == sgp::ScoreKind::coherence || kind == sgp::ScoreKind::coherence_density)
    cfg.init_mode = sgp::InitMode::coherent_seed;

  auto clusters = sgp::extract_top_k_clusters(net, kind, scfg, con, cfg, o.top_k);
  echo_common(doc, o);
  doc.set_int("clusters", static_cast<long long>(clusters.size()));
  bool all_converged = !clusters.empty();
  for (size_t i = 0; i < clusters.size(); ++i) {
    const auto& c = clusters[i];
    std::string pre = "cluster" + std::to_string(i) + "_";
    doc.set_array(pre + "nodes", c.nodes);
    doc.set_array(pre + "attributes", c.attributes);
    doc.set_double(pre + "score", c.score);
    doc.set_int(pre + "converged", c.converged ? 1 : 0);
    doc.set_int(pre + "iterations", c.iterations_used);
    doc.set_array(pre + "objective_trace", c.objective_trace);
    doc.set_array(pre + "step_norms", c.step_norm_trace);
    if (!c.converged) all_converged = false;
  }
  return all_converged ? 0 : 2;
}

int cmd_generate(const std::string& task, const std::string& out_dir, long long seed, double mu,
                 int n, int p, int cluster_size, int n_attrs_signal, const std::string& base) {
  fs::create_directories(out_dir);
  sgp::Document meta;
  meta.set("task", task);
  meta.set_int("seed", seed);
  sgp::GroundTruth truth;
  if (task == "coherent") {
    sgp::CoherentSynthConfig cfg;
    cfg.rng_seed = static_cast<uint64_t>(seed);
    auto [net, t] = sgp::generate_coherent(cfg);
    truth = t;
    meta.set_int("n_clusters_incoherent", cfg.n_clusters_incoherent);
    meta.set_int("n_attrs_total", cfg.n_attrs_total);
    meta.set_int("n_attrs_coherent", cfg.n_attrs_coherent);
    meta.set_int("cluster_size", cfg.cluster_size);
    meta.set_double("p_in", cfg.p_in);
    meta.set_double("p_out", cfg.p_out);
    meta.set_double("coherent_std", cfg.coherent_std);
    meta.set("mu_distribution", "uniform[-2,2] per coherent attribute");
    sgp::save_network(net, out_dir + "/network.txt", out_dir + "/attributes.txt");
  } else if (task == "anomalous") {
    sgp::AnomalySynthConfig cfg;
    cfg.n = n;
    cfg.p = p;
    cfg.cluster_size = cluster_size;
    cfg.n_attrs_anomalous = n_attrs_signal;
    cfg.signal_mu = mu;
    cfg.base_graph = sgp::base_graph_from_string(base);
    cfg.rng_seed = static_cast<uint64_t>(seed);
    auto [net, t] = sgp::generate_anomalous(cfg);
    truth = t;
    meta.set_int("n", cfg.n);
    meta.set_int("p", cfg.p);
    meta.set_int("cluster_size", cfg.cluster_size);
    meta.set_int("n_attrs_anomalous", cfg.n_attrs_anomalous);
    meta.set_double("signal_mu", cfg.signal_mu);
    meta.set("base_graph", base);
    sgp::save_network(net, out_dir + "/network.txt", out_dir + "/attributes.txt");
  } else {
    throw std::runtime_error("unknown task '" + task + "' (coherent|anomalous)");
  }
  sgp::save_truth(truth, meta, out_dir + "/truth.txt");
  sgp::Document stamp = meta;
  stamp.set("timestamp", timestamp());
  stamp.save(out_dir + "/metadata.txt");
  log_at(2, "wrote dataset to " + out_dir);
  return 0;
}

int cmd_evaluate(const std::string& result_file, const std::string& truth_file,
                 const std::string& net_file, const std::string& attrs_file,
                 const std::string& out_file) {
  sgp::Document result = sgp::Document::load(result_file);
  sgp::Document out;
  int clusters = static_cast<int>(result.get_int("clusters"));
  out.set_int("clusters", clusters);
  sgp::GroundTruth truth;
  bool have_truth = !truth_file.empty();
  if (have_truth) truth = sgp::load_truth(truth_file);
  bool have_net = !net_file.empty() && !attrs_file.empty();
  std::unique_ptr<sgp::AttributedNetwork> net;
  if (have_net) net = std::make_unique<sgp::AttributedNetwork>(sgp::load_network(net_file, attrs_file));
  for (int i = 0; i < clusters; ++i) {
    std::string pre = "cluster" + std::to_string(i) + "_";
    sgp::IndexSet nodes = result.get_ints(pre + "nodes");
    sgp::IndexSet attrs = result.get_ints(pre + "attributes");
    if (have_net) {
      for (int v : nodes)
        if (v < 0 || v >= net->node_count())
          throw std::runtime_error("result/network mismatch: node " + std::to_string(v) +
                                   " out of range");
      auto m = sgp::cluster_metrics(*net, nodes, attrs);
      out.set_double(pre + "density", m.density);
      out.set_int(pre + "size", m.size);
      out.set_double(pre + "coherence_distance", m.coherence_distance);
    }
    if (have_truth) {
      auto fn = sgp::f_measure(truth.nodes, nodes);
      auto fa = sgp::f_measure(truth.attributes, attrs);
      out.set_double(pre + "node_precision", fn.precision);
      out.set_double(pre + "node_recall", fn.recall);
      out.set_double(pre + "node_f", fn.f);
      out.set_double(pre + "attr_precision", fa.precision);
      out.set_double(pre + "attr_recall", fa.recall);
      out.set_double(pre + "attr_f", fa.f);
    }
  }
  out.set("timestamp", timestamp());
  out.save(out_file);
  return 0;
}

int cmd_verify_rsc(const std::string& net_file, const std::string& attrs_file,
                   const std::string& score, int k, int s, int trials, long long seed,
                   const std::string& out_file) {
  sgp::AttributedNetwork net = sgp::load_network(net_file, attrs_file);
  sgp::ScoreKind kind = sgp::score_kind_from_string(score);
  sgp::ScoreConfig scfg;
  scfg.response_c = Eigen::VectorXd::Zero(net.attr_count());
  sgp::RscConstants lemma = sgp::lemma_constants(kind, net, scfg);
  if (!lemma.applicable) log_at(1, "closed-form constants unavailable: " + lemma.note);
  sgp::TopologyConstraint con;
  con.k = std::min(k, net.node_count());
  auto sc = sgp::make_score(kind, net, scfg);
  auto samp = sgp::sample_rsc_rss(*sc, net, con, std::min(s, net.attr_count()), trials,
                                  static_cast<uint64_t>(seed), &lemma);
  sgp::Document doc = sgp::rsc_report(kind, lemma, &samp);
  doc.set("timestamp", timestamp());
  doc.save(out_file);
  return 0;
}

int cmd_bench(const std::string& task, int trials, long long seed, const std::string& out_dir,
              DetectOptions detect_opts, double mu, int n, int p, int cluster_size,
              int n_attrs_signal, const std::string& base) {
  fs::create_directories(out_dir);
  std::vector<double> node_f, attr_f, wall_ms;
  for (int t = 0; t < trials; ++t) {
    std::string dir = out_dir + "/trial_" + std::to_string(t);
    long long tseed = static_cast<long long>(sgp::trial_seed(static_cast<uint64_t>(seed), t));
    cmd_generate(task, dir, tseed, mu, n, p, cluster_size, n_attrs_signal, base);
    DetectOptions o = detect_opts;
    o.net_file = dir + "/network.txt";
    o.attrs_file = dir + "/attributes.txt";
    o.out_file = dir + "/result.txt";
    o.seed = tseed;
    sgp::Document result;
    auto start = std::chrono::steady_clock::now();
    run_detect_into(o, result);
    auto stop = std::chrono::steady_clock::now();
    double ms = std::chrono::duration<double, std::milli>(stop - start).count();
    wall_ms.push_back(ms);
    result.set("timestamp", timestamp());
    result.save(o.out_file);
    cmd_evaluate(o.out_file, dir + "/truth.txt", o.net_file, o.attrs_file, dir + "/metrics.txt");
    sgp::Document metrics = sgp::Document::load(dir + "/metrics.txt");
    if (metrics.has("cluster0_node_f")) {
      node_f.push_back(metrics.get_double("cluster0_node_f"));
      attr_f.push_back(metrics.get_double("cluster0_attr_f"));
    }
    log_at(2, "trial " + std::to_string(t) + ": " + std::to_string(ms) + " ms");
  }
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / v.size();
  };
  auto stddev = [&](const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double m = mean(v), s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / (v.size() - 1));
  };
  std::vector<double> sorted = wall_ms;
  std::sort(sorted.begin(), sorted.end());
  sgp::Document summary;
  summary.set("task", task);
  summary.set_int("trials", trials);
  summary.set_int("seed", seed);
  echo_common(summary, detect_opts);
  summary.set_double("node_f_mean", mean(node_f));
  summary.set_double("node_f_std", stddev(node_f));
  summary.set_double("attr_f_mean", mean(attr_f));
  summary.set_double("attr_f_std", stddev(attr_f));
  summary.set_double("detect_ms_median", sorted.empty() ? 0.0 : sorted[sorted.size() / 2]);
  summary.set_double("detect_ms_mean", mean(wall_ms));
  summary.set("timestamp", timestamp());
  summary.save(out_dir + "/summary.txt");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"subspace cluster detection in attributed networks"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "write a synthetic dataset");
  std::string gen_task = "coherent", gen_out, gen_base = "grid";
  long long gen_seed = 0;
  double gen_mu = 3.0;
  int gen_n = 400, gen_p = 50, gen_cluster = 30, gen_sig_attrs = 5;
  gen->add_option("--task", gen_task, "coherent|anomalous");
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--seed", gen_seed, "rng seed");
  gen->add_option("--mu", gen_mu, "anomalous signal mean");
  gen->add_option("--n", gen_n, "anomalous node count");
  gen->add_option("--p", gen_p, "anomalous attribute count");
  gen->add_option("--cluster-size", gen_cluster, "planted cluster size");
  gen->add_option("--signal-attrs", gen_sig_attrs, "anomalous attribute count in cluster");
  gen->add_option("--base-graph", gen_base, "grid|knn|erdos-renyi");

  // detect
  auto* det = app.add_subcommand("detect", "run the pursuit on a dataset");
  DetectOptions d;
  auto* dn = det->add_option("--net", d.net_file, "edge list file")->required();
  auto* da = det->add_option("--attrs", d.attrs_file, "attribute matrix file")->required();
  det->add_option("--out", d.out_file, "result file");
  det->add_option("--config", d.config_file, "key-value config document");
  auto* o_score = det->add_option("--score", d.score,
                                  "fisher|elevated-mean|coherence|coherence-density|nsq-error|logistic");
  auto* o_k = det->add_option("--k", d.k, "node budget");
  auto* o_s = det->add_option("--s", d.s, "attribute budget");
  auto* o_topk = det->add_option("--top-k", d.top_k, "number of clusters to extract");
  auto* o_backend = det->add_option("--backend", d.backend, "exact|pcst");
  auto* o_seed = det->add_option("--seed", d.seed, "rng seed");
  auto* o_eps = det->add_option("--epsilon", d.epsilon, "termination tolerance");
  auto* o_mi = det->add_option("--max-iters", d.max_iters, "iteration cap");
  auto* o_lam = det->add_option("--lambda", d.lambda, "density tradeoff weight");
  auto* o_sig = det->add_option("--sigma", d.sigma, "coherence variance parameter");
  (void)dn;
  (void)da;

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "score a result against truth/network");
  std::string ev_result, ev_truth, ev_net, ev_attrs, ev_out = "metrics.txt";
  ev->add_option("--result", ev_result, "detect result file")->required();
  ev->add_option("--truth", ev_truth, "ground truth file");
  ev->add_option("--net", ev_net, "edge list file");
  ev->add_option("--attrs", ev_attrs, "attribute matrix file");
  ev->add_option("--out", ev_out, "metrics file");

  // verify-rsc
  auto* vr = app.add_subcommand("verify-rsc", "curvature constants report");
  std::string vr_net, vr_attrs, vr_score = "fisher", vr_out = "rsc_report.txt";
  int vr_k = 5, vr_s = 5, vr_trials = 1000;
  long long vr_seed = 0;
  vr->add_option("--net", vr_net, "edge list file")->required();
  vr->add_option("--attrs", vr_attrs, "attribute matrix file")->required();
  vr->add_option("--score", vr_score, "score function");
  vr->add_option("--k", vr_k, "node budget");
  vr->add_option("--s", vr_s, "attribute budget");
  vr->add_option("--trials", vr_trials, "sample count");
  vr->add_option("--seed", vr_seed, "rng seed");
  vr->add_option("--out", vr_out, "report file");

  // bench
  auto* be = app.add_subcommand("bench", "generate + detect + evaluate over trials");
  std::string be_task = "coherent", be_out, be_base = "grid";
  int be_trials = 5;
  long long be_seed = 0;
  double be_mu = 3.0;
  int be_n = 400, be_p = 50, be_cluster = 30, be_sig_attrs = 5;
  DetectOptions bd;
  be->add_option("--task", be_task, "coherent|anomalous");
  be->add_option("--out", be_out, "output directory")->required();
  be->add_option("--trials", be_trials, "trial count");
  be->add_option("--seed", be_seed, "base rng seed");
  be->add_option("--mu", be_mu, "anomalous signal mean");
  be->add_option("--n", be_n, "anomalous node count");
  be->add_option("--p", be_p, "anomalous attribute count");
  be->add_option("--cluster-size", be_cluster, "planted cluster size");
  be->add_option("--signal-attrs", be_sig_attrs, "anomalous attribute count in cluster");
  be->add_option("--base-graph", be_base, "grid|knn|erdos-renyi");
  be->add_option("--score", bd.score, "score function");
  be->add_option("--k", bd.k, "node budget");
  be->add_option("--s", bd.s, "attribute budget");
  be->add_option("--backend", bd.backend, "exact|pcst");
  be->add_option("--epsilon", bd.epsilon, "termination tolerance");
  be->add_option("--max-iters", bd.max_iters, "iteration cap");
  be->add_option("--lambda", bd.lambda, "density tradeoff weight");
  be->add_option("--sigma", bd.sigma, "coherence variance parameter");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed())
      return cmd_generate(gen_task, gen_out, gen_seed, gen_mu, gen_n, gen_p, gen_cluster,
                          gen_sig_attrs, gen_base);
    if (det->parsed()) {
      if (!d.config_file.empty()) {
        sgp::Document cfg = sgp::Document::load(d.config_file);
        apply_config(o_score, cfg, "score", d.score);
        apply_config(o_k, cfg, "k", d.k);
        apply_config(o_s, cfg, "s", d.s);
        apply_config(o_topk, cfg, "top_k", d.top_k);
        apply_config(o_backend, cfg, "backend", d.backend);
        apply_config(o_seed, cfg, "seed", d.seed);
        apply_config(o_eps, cfg, "epsilon", d.epsilon);
        apply_config(o_mi, cfg, "max_iters", d.max_iters);
        apply_config(o_lam, cfg, "lambda", d.lambda);
        apply_config(o_sig, cfg, "sigma", d.sigma);
      }
      sgp::Document result;
      int code = run_detect_into(d, result);
      result.set("timestamp", timestamp());
      result.save(d.out_file);
      return code;
    }
    if (ev->parsed()) return cmd_evaluate(ev_result, ev_truth, ev_net, ev_attrs, ev_out);
    if (vr->parsed())
      return cmd_verify_rsc(vr_net, vr_attrs, vr_score, vr_k, vr_s, vr_trials, vr_seed, vr_out);
    if (be->parsed())
      return cmd_bench(be_task, be_trials, be_seed, be_out, bd, be_mu, be_n, be_p, be_cluster,
                       be_sig_attrs, be_base);
  } catch (const std::exception& e) {
    log_at(0, e.what());
    return 1;
  }
  return 1;
}
