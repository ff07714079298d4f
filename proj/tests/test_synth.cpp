#include <catch2/catch_amalgamated.hpp>

#include <cstdio>

#include "sgp/synth.hpp"

using namespace sgp;

TEST_CASE("coherent generator shape and determinism") {
  CoherentSynthConfig cfg;
  cfg.rng_seed = 42;
  auto [net, truth] = generate_coherent(cfg);
  REQUIRE(net.node_count() == 300);  // (9 + 1) clusters of 30
  REQUIRE(net.attr_count() == 100);
  REQUIRE(truth.nodes.size() == 30);
  REQUIRE(truth.attributes.size() == 10);
  REQUIRE(induced_subgraph_connected(net, truth.nodes));
  auto [net2, truth2] = generate_coherent(cfg);
  REQUIRE(net2.edges() == net.edges());
  REQUIRE((net2.attributes() - net.attributes()).norm() == 0.0);
  REQUIRE(truth2.nodes == truth.nodes);
  REQUIRE(truth2.attributes == truth.attributes);
  cfg.rng_seed = 43;
  auto [net3, truth3] = generate_coherent(cfg);
  REQUIRE((net3.attributes() - net.attributes()).norm() > 0.0);
}

TEST_CASE("coherent generator respects edge densities") {
  CoherentSynthConfig cfg;
  cfg.rng_seed = 9;
  auto [net, truth] = generate_coherent(cfg);
  std::vector<int> block(net.node_count());
  for (int v = 0; v < net.node_count(); ++v) block[v] = v / cfg.cluster_size;
  long intra = 0, inter = 0;
  for (auto [u, v] : net.edges()) (block[u] == block[v] ? intra : inter)++;
  int c = 10, m = cfg.cluster_size;
  double intra_pairs = c * (m * (m - 1) / 2.0);
  double inter_pairs = (c * (c - 1) / 2.0) * m * m;
  REQUIRE(intra / intra_pairs == Catch::Approx(cfg.p_in).margin(0.1));
  REQUIRE(inter / inter_pairs == Catch::Approx(cfg.p_out).margin(0.05));
}

TEST_CASE("coherent attributes are tight on the planted set") {
  CoherentSynthConfig cfg;
  cfg.rng_seed = 4;
  auto [net, truth] = generate_coherent(cfg);
  const auto& W = net.attributes();
  double planted = 0.0, background = 0.0;
  for (int j : truth.attributes) {
    double mean = 0.0;
    for (int v : truth.nodes) mean += W(v, j);
    mean /= truth.nodes.size();
    double var = 0.0;
    for (int v : truth.nodes) var += (W(v, j) - mean) * (W(v, j) - mean);
    planted += var / truth.nodes.size();
  }
  planted /= truth.attributes.size();
  for (int j = 0; j < W.cols(); ++j) background += W.col(j).squaredNorm();
  background /= W.size();
  REQUIRE(planted < 0.01);      // ~coherent_std^2 = 0.001
  REQUIRE(background > 0.5);    // ~unit variance overall
}

TEST_CASE("anomalous generator: grid, knn, erdos-renyi") {
  for (auto base : {BaseGraph::grid, BaseGraph::knn, BaseGraph::erdos_renyi}) {
    AnomalySynthConfig cfg;
    cfg.n = 100;
    cfg.p = 20;
    cfg.cluster_size = 10;
    cfg.n_attrs_anomalous = 3;
    cfg.base_graph = base;
    cfg.er_edge_prob = 0.08;  // default 0.02 leaves n=100 disconnected
    cfg.rng_seed = 6;
    auto [net, truth] = generate_anomalous(cfg);
    INFO(to_string(base));
    REQUIRE(net.node_count() == 100);
    REQUIRE(net.attr_count() == 20);
    REQUIRE(truth.nodes.size() == 10);
    REQUIRE(truth.attributes.size() == 3);
    REQUIRE(induced_subgraph_connected(net, truth.nodes));
  }
}

TEST_CASE("anomalous signal lifts the planted block mean") {
  AnomalySynthConfig cfg;
  cfg.n = 400;
  cfg.rng_seed = 8;
  auto [net, truth] = generate_anomalous(cfg);
  double on = 0.0, off = 0.0;
  for (int j : truth.attributes) {
    for (int v : truth.nodes) on += net.attributes()(v, j);
  }
  on /= truth.attributes.size() * truth.nodes.size();
  off = net.attributes().mean();
  REQUIRE(on == Catch::Approx(cfg.signal_mu).margin(0.5));
  REQUIRE(std::abs(off) < 0.5);
  cfg.signal_mu = 0.0;
  auto [net0, truth0] = generate_anomalous(cfg);
  double on0 = 0.0;
  for (int j : truth0.attributes)
    for (int v : truth0.nodes) on0 += net0.attributes()(v, j);
  on0 /= truth0.attributes.size() * truth0.nodes.size();
  REQUIRE(std::abs(on0) < 0.5);  // null signal really is null
}

TEST_CASE("f-measure basics") {
  REQUIRE(f_measure({1, 2, 3}, {1, 2, 3}).f == Catch::Approx(1.0));
  REQUIRE(f_measure({1, 2, 3}, {4, 5}).f == 0.0);
  auto half = f_measure({1, 2}, {2, 3});
  REQUIRE(half.precision == Catch::Approx(0.5));
  REQUIRE(half.recall == Catch::Approx(0.5));
  REQUIRE(half.f == Catch::Approx(0.5));
  REQUIRE(f_measure({}, {}).f == 0.0);
}

TEST_CASE("cluster metrics on a triangle") {
  Eigen::MatrixXd W(4, 2);
  W << 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 9.0, 9.0;
  AttributedNetwork net(4, {{0, 1}, {0, 2}, {1, 2}, {2, 3}}, W);
  auto m = cluster_metrics(net, {0, 1, 2}, {0});
  REQUIRE(m.size == 3);
  REQUIRE(m.density == Catch::Approx(2.0));  // 2*3/3
  REQUIRE(m.coherence_distance == Catch::Approx(0.0).margin(1e-12));
  auto single = cluster_metrics(net, {3}, {0});
  REQUIRE(single.singleton);
}

TEST_CASE("truth files round-trip") {
  GroundTruth truth;
  truth.nodes = {0, 3, 17};
  truth.attributes = {2, 5};
  Document meta;
  meta.set("task", "anomalous");
  meta.set_int("seed", 9);
  save_truth(truth, meta, "truth_roundtrip.tmp");
  Document back_meta;
  auto back = load_truth("truth_roundtrip.tmp", &back_meta);
  REQUIRE(back.nodes == truth.nodes);
  REQUIRE(back.attributes == truth.attributes);
  REQUIRE(back_meta.get("task") == "anomalous");
  REQUIRE(back_meta.get_int("seed") == 9);
  std::remove("truth_roundtrip.tmp");
}

TEST_CASE("per-trial seeds are distinct and reproducible") {
  REQUIRE(trial_seed(7, 0) == trial_seed(7, 0));
  REQUIRE(trial_seed(7, 0) != trial_seed(7, 1));
  REQUIRE(trial_seed(7, 0) != trial_seed(8, 0));
}

TEST_CASE("config validation rejects nonsense") {
  CoherentSynthConfig c;
  c.p_in = 0.05;  // below p_out
  REQUIRE_THROWS(generate_coherent(c));
  AnomalySynthConfig a;
  a.cluster_size = 0;
  REQUIRE_THROWS(generate_anomalous(a));
}
