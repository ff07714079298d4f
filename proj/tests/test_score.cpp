#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "sgp/score.hpp"

using namespace sgp;

namespace {

AttributedNetwork make_net(int n, Eigen::MatrixXd W, std::vector<std::pair<int, int>> edges = {}) {
  return AttributedNetwork(n, std::move(edges), std::move(W));
}

// central finite differences against both analytic gradients
void check_gradients(const ScoreFunction& f, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                     double h = 1e-5, double tol = 1e-5) {
  Eigen::VectorXd gx = f.grad_x(x, y), gy = f.grad_y(x, y);
  for (int i = 0; i < x.size(); ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    double fd = (f.value(xp, y) - f.value(xm, y)) / (2 * h);
    REQUIRE_THAT(gx[i], Catch::Matchers::WithinRel(fd, tol) || Catch::Matchers::WithinAbs(fd, tol));
  }
  for (int i = 0; i < y.size(); ++i) {
    Eigen::VectorXd yp = y, ym = y;
    yp[i] += h;
    ym[i] -= h;
    double fd = (f.value(x, yp) - f.value(x, ym)) / (2 * h);
    REQUIRE_THAT(gy[i], Catch::Matchers::WithinRel(fd, tol) || Catch::Matchers::WithinAbs(fd, tol));
  }
}

}  // namespace

TEST_CASE("score kind names round-trip") {
  for (auto k : {ScoreKind::fisher, ScoreKind::elevated_mean, ScoreKind::coherence,
                 ScoreKind::coherence_density, ScoreKind::nsq_error, ScoreKind::logistic})
    REQUIRE(score_kind_from_string(to_string(k)) == k);
  REQUIRE_THROWS(score_kind_from_string("bogus"));
}

TEST_CASE("config validation") {
  Eigen::MatrixXd W(1, 1);
  W << 1.0;
  auto net = make_net(1, W);
  ScoreConfig bad;
  bad.sigma = 0.0;
  REQUIRE_THROWS(make_score(ScoreKind::coherence, net, bad));
  bad = ScoreConfig{};
  bad.r_sparsity = 0;
  REQUIRE_THROWS(make_score(ScoreKind::fisher, net, bad));
  ScoreConfig wrong_len;
  wrong_len.response_c = Eigen::VectorXd::Zero(3);
  REQUIRE_THROWS(make_score(ScoreKind::nsq_error, net, wrong_len));
}

TEST_CASE("fisher hand value") {
  Eigen::MatrixXd W(2, 1);
  W << 2.0, 3.0;
  auto net = make_net(2, W, {{0, 1}});
  auto f = make_score(ScoreKind::fisher, net);
  Eigen::VectorXd x = Eigen::VectorXd::Ones(2), y = Eigen::VectorXd::Ones(1);
  REQUIRE(f->value(x, y) == Catch::Approx(5.0 - 1.5));
  REQUIRE(f->grad_x(x, y)[0] == Catch::Approx(1.0));
  REQUIRE(f->grad_x(x, y)[1] == Catch::Approx(2.0));
  REQUIRE(f->grad_y(x, y)[0] == Catch::Approx(4.0));
}

TEST_CASE("elevated-mean equals fisher when the node mass sums to one") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd W(3, 2);
  for (int i = 0; i < W.size(); ++i) W(i / 2, i % 2) = gauss(rng);
  auto net = make_net(3, W);
  auto em = make_score(ScoreKind::elevated_mean, net);
  auto fi = make_score(ScoreKind::fisher, net);
  Eigen::VectorXd x(3), y(2);
  x << 0.2, 0.5, 0.3;  // sums to 1
  y << 0.4, 0.9;
  REQUIRE(em->value(x, y) == Catch::Approx(fi->value(x, y)));
}

TEST_CASE("coherence hand value: opposite attribute values") {
  Eigen::MatrixXd W(2, 1);
  W << 1.0, -1.0;
  auto net = make_net(2, W, {{0, 1}});
  ScoreConfig cfg;
  cfg.sigma = 0.01;
  auto f = make_score(ScoreKind::coherence, net, cfg);
  Eigen::VectorXd x = Eigen::VectorXd::Ones(2), y = Eigen::VectorXd::Ones(1);
  // mean 0, squared deviations 1 each: 2 - 200 - 1.5
  REQUIRE(f->value(x, y) == Catch::Approx(-199.5));
}

TEST_CASE("density term adds lambda * 2|E_S| / |S| on a clique") {
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(3, 1);
  auto net = make_net(3, W, {{0, 1}, {0, 2}, {1, 2}});
  ScoreConfig cfg;
  cfg.lambda = 5.0;
  auto base = make_score(ScoreKind::coherence, net, cfg);
  auto dens = make_score(ScoreKind::coherence_density, net, cfg);
  Eigen::VectorXd x = Eigen::VectorXd::Ones(3), y = Eigen::VectorXd::Ones(1);
  REQUIRE(dens->value(x, y) - base->value(x, y) == Catch::Approx(5.0 * 6.0 / 3.0));
  cfg.lambda = 0.0;
  auto nolam = make_score(ScoreKind::coherence_density, net, cfg);
  REQUIRE(nolam->value(x, y) == Catch::Approx(base->value(x, y)));
}

TEST_CASE("nsq-error hand value and default response") {
  Eigen::MatrixXd W(1, 1);
  W << 0.0;
  auto net = make_net(1, W);
  ScoreConfig cfg;
  cfg.response_c = Eigen::VectorXd::Ones(1);
  auto f = make_score(ScoreKind::nsq_error, net, cfg);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(1), y = Eigen::VectorXd::Zero(1);
  REQUIRE(f->value(x, y) == Catch::Approx(-1.0));
  auto fz = make_score(ScoreKind::nsq_error, net);  // response defaults to zero
  REQUIRE(fz->value(x, y) == Catch::Approx(0.0));
}

TEST_CASE("logistic hand value at x = 0") {
  Eigen::MatrixXd W(2, 3);
  W << 1, 2, 3, 4, 5, 6;
  auto net = make_net(2, W, {{0, 1}});
  auto f = make_score(ScoreKind::logistic, net);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(2), y(3);
  y << 0.2, 0.5, 0.8;
  REQUIRE(f->value(x, y) == Catch::Approx(3.0 * std::log(0.5) - 0.5 * y.squaredNorm()));
  // saturated inner products stay finite thanks to the log clamp
  Eigen::VectorXd xbig = Eigen::VectorXd::Constant(2, 50.0);
  REQUIRE(std::isfinite(f->value(xbig, y)));
}

TEST_CASE("all six scores pass finite-difference checks at random interior points") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif(0.1, 0.9);
  const int n = 6, p = 4;
  Eigen::MatrixXd W(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) W(i, j) = gauss(rng);
  auto net = make_net(n, W, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {0, 5}});
  ScoreConfig cfg;
  cfg.response_c = Eigen::VectorXd::Ones(p);
  for (auto kind : {ScoreKind::fisher, ScoreKind::elevated_mean, ScoreKind::coherence,
                    ScoreKind::coherence_density, ScoreKind::nsq_error, ScoreKind::logistic}) {
    auto f = make_score(kind, net, cfg);
    for (int pt = 0; pt < 10; ++pt) {
      Eigen::VectorXd x(n), y(p);
      for (int i = 0; i < n; ++i) x[i] = unif(rng);
      for (int j = 0; j < p; ++j) y[j] = unif(rng);
      check_gradients(*f, x, y);
    }
  }
}

TEST_CASE("value is invariant under node relabeling") {
  std::mt19937_64 rng(29);
  std::normal_distribution<double> gauss;
  const int n = 5, p = 3;
  Eigen::MatrixXd W(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) W(i, j) = gauss(rng);
  std::vector<std::pair<int, int>> edges{{0, 1}, {1, 2}, {2, 3}, {3, 4}};
  auto net = make_net(n, W, edges);
  std::vector<int> perm{2, 0, 4, 1, 3};
  Eigen::MatrixXd Wp(n, p);
  for (int i = 0; i < n; ++i) Wp.row(perm[i]) = W.row(i);
  std::vector<std::pair<int, int>> ep;
  for (auto [u, v] : edges) ep.push_back({perm[u], perm[v]});
  auto netp = make_net(n, Wp, ep);
  Eigen::VectorXd x(n), y(p);
  std::uniform_real_distribution<double> unif(0.1, 0.9);
  for (int i = 0; i < n; ++i) x[i] = unif(rng);
  for (int j = 0; j < p; ++j) y[j] = unif(rng);
  Eigen::VectorXd xp(n);
  for (int i = 0; i < n; ++i) xp[perm[i]] = x[i];
  for (auto kind : {ScoreKind::fisher, ScoreKind::elevated_mean, ScoreKind::coherence,
                    ScoreKind::coherence_density, ScoreKind::logistic}) {
    auto f = make_score(kind, net);
    auto fp = make_score(kind, netp);
    REQUIRE(f->value(x, y) == Catch::Approx(fp->value(xp, y)));
  }
}

TEST_CASE("domains and degeneracy flags") {
  Eigen::MatrixXd W(2, 1);
  W << 1.0, 2.0;
  auto net = make_net(2, W, {{0, 1}});
  auto fi = make_score(ScoreKind::fisher, net);
  REQUIRE(fi->domain_x().lo == 0.0);
  REQUIRE(fi->domain_x().hi == 1.0);
  auto nq = make_score(ScoreKind::nsq_error, net);
  REQUIRE_FALSE(nq->domain_x().bounded());
  auto em = make_score(ScoreKind::elevated_mean, net);
  REQUIRE(em->degenerate_at(Eigen::VectorXd::Zero(2)));
  REQUIRE_FALSE(em->degenerate_at(Eigen::VectorXd::Ones(2)));
  BoxDomain box{0.0, 1.0};
  REQUIRE(box.clamp(-2.0) == 0.0);
  REQUIRE(box.clamp(0.5) == 0.5);
  REQUIRE(box.clamp(3.0) == 1.0);
}
