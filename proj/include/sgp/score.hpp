#ifndef SGP_SCORE_HPP
#define SGP_SCORE_HPP

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>

#include "sgp/graph.hpp"

namespace sgp {

enum class ScoreKind { fisher, elevated_mean, coherence, coherence_density, nsq_error, logistic };

inline const char* to_string(ScoreKind k) {
  switch (k) {
    case ScoreKind::fisher: return "fisher";
    case ScoreKind::elevated_mean: return "elevated-mean";
    case ScoreKind::coherence: return "coherence";
    case ScoreKind::coherence_density: return "coherence-density";
    case ScoreKind::nsq_error: return "nsq-error";
    case ScoreKind::logistic: return "logistic";
  }
  return "?";
}

inline ScoreKind score_kind_from_string(const std::string& s) {
  if (s == "fisher") return ScoreKind::fisher;
  if (s == "elevated-mean") return ScoreKind::elevated_mean;
  if (s == "coherence") return ScoreKind::coherence;
  if (s == "coherence-density") return ScoreKind::coherence_density;
  if (s == "nsq-error") return ScoreKind::nsq_error;
  if (s == "logistic") return ScoreKind::logistic;
  throw std::invalid_argument("unknown score '" + s + "'");
}

// Per-coordinate box, uniform across coordinates.
struct BoxDomain {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool bounded() const { return std::isfinite(lo) && std::isfinite(hi); }
  double clamp(double v) const { return std::min(hi, std::max(lo, v)); }
};

struct ScoreConfig {
  double sigma = 0.01;        // coherence variance parameter
  double lambda = 5.0;        // density tradeoff weight
  Eigen::VectorXd response_c; // response vector for nsq-error (length p)
  int r_sparsity = 1;         // assumed support sum for elevated-mean bounds
  double denom_guard = 1e-8;

  void validate() const {
    if (sigma <= 0.0) throw std::invalid_argument("score config: sigma must be positive");
    if (lambda < 0.0) throw std::invalid_argument("score config: lambda must be non-negative");
    if (r_sparsity < 1) throw std::invalid_argument("score config: r_sparsity must be >= 1");
    if (denom_guard <= 0.0) throw std::invalid_argument("score config: denom_guard must be positive");
  }
};

// f(x, y) with analytic partial gradients. Stateless given (net, cfg); safe
// for concurrent evaluation.
class ScoreFunction {
 public:
  ScoreFunction(const AttributedNetwork& net, ScoreConfig cfg)
      : net_(net), cfg_(std::move(cfg)) {}
  virtual ~ScoreFunction() = default;

  virtual double value(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const = 0;
  virtual Eigen::VectorXd grad_x(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const = 0;
  virtual Eigen::VectorXd grad_y(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const = 0;
  virtual BoxDomain domain_x() const { return {0.0, 1.0}; }
  virtual BoxDomain domain_y() const { return {0.0, 1.0}; }
  virtual ScoreKind kind() const = 0;

  // True where a guarded denominator kicked in (1'x ~ 0).
  virtual bool degenerate_at(const Eigen::VectorXd& x) const {
    (void)x;
    return false;
  }

  const AttributedNetwork& net() const { return net_; }
  const ScoreConfig& config() const { return cfg_; }

 protected:
  double regularizer(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    return -0.5 * x.squaredNorm() - 0.5 * y.squaredNorm();
  }

  const AttributedNetwork& net_;
  ScoreConfig cfg_;
};

// x'Wy - 0.5||x||^2 - 0.5||y||^2
class FisherScore : public ScoreFunction {
 public:
  using ScoreFunction::ScoreFunction;
  double value(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const override {
    return x.dot(net_.attributes() * y) + regularizer(x, y);
  }
  Eigen::VectorXd grad_x(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const override {
    return net_.attributes() * y - x;
  }
  Eigen::VectorXd grad_y(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const override {
    return net_.attributes().transpose() * x - y;
  }
  ScoreKind kind() const override { return ScoreKind::fisher; }
};

// x'Wy / sqrt(1'x) - 0.5||x||^2 - 0.5||y||^2, guarded at 1'x ~ 0
class ElevatedMeanScore : public ScoreFunction {
 public:
  using ScoreFunction::ScoreFunction;
  double value(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const override {
    double t = std::max(x.sum(), cfg_.denom_guard);
    return x.dot(net_.attributes() * y) / std::sqrt(t) + regularizer(x, y);
  }
  Eigen::VectorXd grad_x(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const override {
    double t = std::max(x.sum(), cfg_.denom_guard);
    Eigen::VectorXd wy = net_.attributes() * y;
    double xwy = x.dot(wy);
    return wy / std::sqrt(t) -
           Eigen::VectorXd::Constant(x.size(), 0.5 * xwy * std::pow(t, -1.5)) - x;
  }
  Eigen::VectorXd grad_y(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const override {
    double t = std::max(x.sum(), cfg_.denom_guard);
    return net_.attributes().transpose() * x / std::sqrt(t) - y;
  }
  bool degenerate_at(const Eigen::VectorXd& x) const override {
    return x.sum() <= cfg_.denom_guard;
  }
  ScoreKind kind() const override { return ScoreKind::elevated_mean; }
};

// x'(W.W)y - (1/sigma) x'(D.D)y - 0.5||x||^2 - 0.5||y||^2 with
// D = W - 1 m', m = W'x / 1'x. The mean-dependence of D contributes nothing
// to grad_x because sum_i x_i D_ij = 0 by construction of m.
class CoherenceScore : public ScoreFunction {
 public:
  using ScoreFunction::ScoreFunction;
  double value(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const override {
    return quad_terms(x, y) + regularizer(x, y);
  }
  Eigen::VectorXd grad_x(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const override {
    Eigen::MatrixXd d2 = centered_squared(x);
    const Eigen::MatrixXd& W = net_.attributes();
    return (W.cwiseProduct(W) * y) - (1.0 / cfg_.sigma) * (d2 * y) - x;
  }
  Eigen::VectorXd grad_y(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const override {
    Eigen::MatrixXd d2 = centered_squared(x);
    const Eigen::MatrixXd& W = net_.attributes();
    return (W.cwiseProduct(W).transpose() * x) - (1.0 / cfg_.sigma) * (d2.transpose() * x) - y;
  }
  bool degenerate_at(const Eigen::VectorXd& x) const override {
    return x.sum() <= cfg_.denom_guard;
  }
  ScoreKind kind() const override { return ScoreKind::coherence; }

 protected:
  Eigen::MatrixXd centered_squared(const Eigen::VectorXd& x) const {
    const Eigen::MatrixXd& W = net_.attributes();
    double t = std::max(x.sum(), cfg_.denom_guard);
    Eigen::RowVectorXd m = (x.transpose() * W) / t;
    Eigen::MatrixXd d = W.rowwise() - m;
    return d.cwiseProduct(d);
  }
  double quad_terms(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    const Eigen::MatrixXd& W = net_.attributes();
    double a = x.dot(W.cwiseProduct(W) * y);
    double b = x.dot(centered_squared(x) * y);
    return a - b / cfg_.sigma;
  }
};

// Coherence score plus lambda * x'Ax / 1'x.
class CoherenceDensityScore : public CoherenceScore {
 public:
  using CoherenceScore::CoherenceScore;
  double value(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const override {
    double t = std::max(x.sum(), cfg_.denom_guard);
    Eigen::VectorXd ax = net_.adjacency_multiply(x);
    return CoherenceScore::value(x, y) + cfg_.lambda * x.dot(ax) / t;
  }
  Eigen::VectorXd grad_x(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const override {
    double t = std::max(x.sum(), cfg_.denom_guard);
    Eigen::VectorXd ax = net_.adjacency_multiply(x);
    double xax = x.dot(ax);
    return CoherenceScore::grad_x(x, y) + cfg_.lambda * (2.0 / t) * ax -
           Eigen::VectorXd::Constant(x.size(), cfg_.lambda * xax / (t * t));
  }
  ScoreKind kind() const override { return ScoreKind::coherence_density; }
};

// -||c - W'x - y||^2 - 0.5||x||^2 - 0.5||y||^2 on unbounded domains
class NegSquaredErrorScore : public ScoreFunction {
 public:
  NegSquaredErrorScore(const AttributedNetwork& net, ScoreConfig cfg)
      : ScoreFunction(net, std::move(cfg)) {
    if (cfg_.response_c.size() == 0)
      cfg_.response_c = Eigen::VectorXd::Zero(net.attr_count());
    if (cfg_.response_c.size() != net.attr_count())
      throw std::invalid_argument("nsq-error: response vector length " +
                                  std::to_string(cfg_.response_c.size()) + " != p = " +
                                  std::to_string(net.attr_count()));
  }
  double value(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const override {
    Eigen::VectorXd r = cfg_.response_c - net_.attributes().transpose() * x - y;
    return -r.squaredNorm() + regularizer(x, y);
  }
  Eigen::VectorXd grad_x(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const override {
    Eigen::VectorXd r = cfg_.response_c - net_.attributes().transpose() * x - y;
    return 2.0 * (net_.attributes() * r) - x;
  }
  Eigen::VectorXd grad_y(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const override {
    Eigen::VectorXd r = cfg_.response_c - net_.attributes().transpose() * x - y;
    return 2.0 * r - y;
  }
  BoxDomain domain_x() const override { return {}; }
  BoxDomain domain_y() const override { return {}; }
  ScoreKind kind() const override { return ScoreKind::nsq_error; }
};

// sum_i [y_i log g(x'w_i) + (1-y_i) log(1-g(x'w_i))] - 0.5||x||^2 - 0.5||y||^2
// where w_i is attribute column i and g the logistic function. Log arguments
// clamped to [1e-12, 1-1e-12].
class LogisticScore : public ScoreFunction {
 public:
  using ScoreFunction::ScoreFunction;
  double value(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const override {
    Eigen::VectorXd z = net_.attributes().transpose() * x;
    double s = 0.0;
    for (int i = 0; i < z.size(); ++i) {
      double g = logistic(z[i]);
      s += y[i] * std::log(clamp_p(g)) + (1.0 - y[i]) * std::log(clamp_p(1.0 - g));
    }
    return s + regularizer(x, y);
  }
  Eigen::VectorXd grad_x(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const override {
    Eigen::VectorXd z = net_.attributes().transpose() * x;
    Eigen::VectorXd g(z.size());
    for (int i = 0; i < z.size(); ++i) g[i] = logistic(z[i]);
    return net_.attributes() * (y - g) - x;
  }
  Eigen::VectorXd grad_y(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const override {
    Eigen::VectorXd z = net_.attributes().transpose() * x;
    Eigen::VectorXd out(z.size());
    for (int i = 0; i < z.size(); ++i) {
      double g = logistic(z[i]);
      out[i] = std::log(clamp_p(g)) - std::log(clamp_p(1.0 - g)) - y[i];
    }
    return out;
  }
  BoxDomain domain_x() const override { return {}; }
  ScoreKind kind() const override { return ScoreKind::logistic; }

 private:
  static double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }
  static double clamp_p(double p) { return std::min(1.0 - 1e-12, std::max(1e-12, p)); }
};

inline std::unique_ptr<ScoreFunction> make_score(ScoreKind kind, const AttributedNetwork& net,
                                                 ScoreConfig cfg = {}) {
  cfg.validate();
  switch (kind) {
    case ScoreKind::fisher: return std::make_unique<FisherScore>(net, std::move(cfg));
    case ScoreKind::elevated_mean: return std::make_unique<ElevatedMeanScore>(net, std::move(cfg));
    case ScoreKind::coherence: return std::make_unique<CoherenceScore>(net, std::move(cfg));
    case ScoreKind::coherence_density:
      return std::make_unique<CoherenceDensityScore>(net, std::move(cfg));
    case ScoreKind::nsq_error: return std::make_unique<NegSquaredErrorScore>(net, std::move(cfg));
    case ScoreKind::logistic: return std::make_unique<LogisticScore>(net, std::move(cfg));
  }
  throw std::invalid_argument("make_score: unknown kind");
}

}  // namespace sgp

#endif
