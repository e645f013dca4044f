#include "pfm/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace pfm {

const std::vector<StrategyKind>& all_strategy_kinds() {
  static const std::vector<StrategyKind> kinds = {
      StrategyKind::Anticor, StrategyKind::Bah, StrategyKind::Crp,
      StrategyKind::Eg,      StrategyKind::Olmar, StrategyKind::Pamr,
      StrategyKind::Up};
  return kinds;
}

std::string strategy_name(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::Anticor: return "ANTICOR";
    case StrategyKind::Bah: return "BAH";
    case StrategyKind::Crp: return "CRP";
    case StrategyKind::Eg: return "EG";
    case StrategyKind::Olmar: return "OLMAR";
    case StrategyKind::Pamr: return "PAMR";
    case StrategyKind::Up: return "UP";
  }
  return "?";
}

Eigen::VectorXd simplex_project(const Eigen::VectorXd& v) {
  const int n = static_cast<int>(v.size());
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cumsum = 0.0;
  double theta = 0.0;
  int rho = 0;
  for (int j = 0; j < n; ++j) {
    cumsum += u[static_cast<std::size_t>(j)];
    const double candidate = (cumsum - 1.0) / (j + 1);
    if (u[static_cast<std::size_t>(j)] - candidate > 0.0) {
      rho = j + 1;
      theta = candidate;
    }
  }
  (void)rho;
  return (v.array() - theta).cwiseMax(0.0).matrix();
}

Eigen::VectorXd eg_update(const Eigen::VectorXd& w, const Eigen::VectorXd& x,
                          double eta) {
  const double wx = w.dot(x);
  if (!(wx > 0.0)) throw std::invalid_argument("eg_update: w.x must be > 0");
  Eigen::VectorXd next =
      (w.array() * (eta * x.array() / wx).exp()).matrix();
  return next / next.sum();
}

Eigen::VectorXd olmar_predict(const AlignedPanel& panel, int t, int window) {
  if (window < 2) throw std::invalid_argument("olmar: window must be >= 2");
  if (t + 1 < window) throw std::invalid_argument("olmar: not enough history");
  const int M = panel.assets();
  Eigen::VectorXd x_tilde(M);
  for (int i = 0; i < M; ++i) {
    double ma = 0.0;
    for (int k = t - window + 1; k <= t; ++k) ma += panel.prices(k, i);
    ma /= window;
    x_tilde[i] = ma / panel.prices(t, i);
  }
  return x_tilde;
}

Eigen::VectorXd olmar_update(const Eigen::VectorXd& w,
                             const Eigen::VectorXd& x_tilde, double epsilon) {
  const double margin = w.dot(x_tilde);
  if (margin >= epsilon) return w;
  const double mean = x_tilde.mean();
  Eigen::VectorXd dir = x_tilde.array() - mean;
  const double den = dir.squaredNorm();
  if (den <= 0.0) return w;  // no direction exists
  const double lambda = (epsilon - margin) / den;
  return simplex_project(w + lambda * dir);
}

Eigen::VectorXd pamr_update(const Eigen::VectorXd& w, const Eigen::VectorXd& x,
                            double epsilon) {
  const double loss = std::max(0.0, w.dot(x) - epsilon);
  if (loss == 0.0) return w;
  const double mean = x.mean();
  Eigen::VectorXd dir = x.array() - mean;
  const double den = dir.squaredNorm();
  if (den <= 0.0) return w;
  const double tau = loss / den;
  return simplex_project(w - tau * dir);
}

Eigen::VectorXd anticor_update(const Eigen::VectorXd& w,
                               const Eigen::MatrixXd& log_relatives,
                               int window) {
  const int M = static_cast<int>(w.size());
  if (window < 2) throw std::invalid_argument("anticor: window must be >= 2");
  if (log_relatives.rows() < 2 * window) return w;

  const Eigen::MatrixXd win1 =
      log_relatives.bottomRows(2 * window).topRows(window);
  const Eigen::MatrixXd win2 = log_relatives.bottomRows(window);

  Eigen::VectorXd mu1 = win1.colwise().mean();
  Eigen::VectorXd mu2 = win2.colwise().mean();
  Eigen::MatrixXd d1 = win1.rowwise() - mu1.transpose();
  Eigen::MatrixXd d2 = win2.rowwise() - mu2.transpose();
  const double denom = static_cast<double>(window - 1);
  Eigen::MatrixXd cov = d1.transpose() * d2 / denom;
  Eigen::VectorXd sd1 = (d1.array().square().colwise().sum() / denom).sqrt();
  Eigen::VectorXd sd2 = (d2.array().square().colwise().sum() / denom).sqrt();

  Eigen::MatrixXd cor = Eigen::MatrixXd::Zero(M, M);
  for (int i = 0; i < M; ++i) {
    for (int j = 0; j < M; ++j) {
      // zero-variance assets contribute no correlation
      if (sd1[i] > 0.0 && sd2[j] > 0.0) cor(i, j) = cov(i, j) / (sd1[i] * sd2[j]);
    }
  }

  // Claim from i to j when i outperformed j in the recent window and their
  // cross-correlation is positive; negative self-correlations add to the
  // claim (the mean-reversion part of the heuristic).
  Eigen::MatrixXd claim = Eigen::MatrixXd::Zero(M, M);
  for (int i = 0; i < M; ++i) {
    for (int j = 0; j < M; ++j) {
      if (i != j && mu2[i] > mu2[j] && cor(i, j) > 0.0) {
        claim(i, j) = cor(i, j) + std::max(-cor(i, i), 0.0) +
                      std::max(-cor(j, j), 0.0);
      }
    }
  }

  Eigen::VectorXd next = w;
  for (int i = 0; i < M; ++i) {
    const double total_claim = claim.row(i).sum();
    if (total_claim <= 0.0) continue;
    for (int j = 0; j < M; ++j) {
      const double transfer = w[i] * claim(i, j) / total_claim;
      next[i] -= transfer;
      next[j] += transfer;
    }
  }
  const double sum = next.sum();
  if (sum > 0.0) next /= sum;
  return next;
}

namespace {

Eigen::VectorXd uniform_weights(int m) {
  return Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
}

Eigen::VectorXd day_relatives(const MarketEnv& env, int t) {
  const auto& p = env.panel().prices;
  return (p.row(t).array() / p.row(t - 1).array()).transpose();
}

class BahStrategy : public Strategy {
 public:
  explicit BahStrategy(int m) : m_(m) {}
  std::optional<ActionWeights> target_weights(const MarketEnv& env) override {
    if (env.state().t == env.start_t()) return make_weights(uniform_weights(m_));
    return std::nullopt;  // hold
  }

 private:
  int m_;
};

class CrpStrategy : public Strategy {
 public:
  explicit CrpStrategy(int m) : m_(m) {}
  std::optional<ActionWeights> target_weights(const MarketEnv& env) override {
    (void)env;
    return make_weights(uniform_weights(m_));
  }

 private:
  int m_;
};

class EgStrategy : public Strategy {
 public:
  EgStrategy(int m, double eta) : w_(uniform_weights(m)), eta_(eta) {}
  std::optional<ActionWeights> target_weights(const MarketEnv& env) override {
    const int t = env.state().t;
    if (t > env.start_t()) w_ = eg_update(w_, day_relatives(env, t), eta_);
    return make_weights(w_);
  }

 private:
  Eigen::VectorXd w_;
  double eta_;
};

class PamrStrategy : public Strategy {
 public:
  PamrStrategy(int m, double eps) : w_(uniform_weights(m)), eps_(eps) {}
  std::optional<ActionWeights> target_weights(const MarketEnv& env) override {
    const int t = env.state().t;
    if (t > env.start_t()) w_ = pamr_update(w_, day_relatives(env, t), eps_);
    return make_weights(w_);
  }

 private:
  Eigen::VectorXd w_;
  double eps_;
};

class OlmarStrategy : public Strategy {
 public:
  OlmarStrategy(int m, double eps, int window)
      : w_(uniform_weights(m)), eps_(eps), window_(window) {}
  std::optional<ActionWeights> target_weights(const MarketEnv& env) override {
    const int t = env.state().t;
    if (t + 1 >= window_) {
      w_ = olmar_update(w_, olmar_predict(env.panel(), t, window_), eps_);
    }
    return make_weights(w_);
  }

 private:
  Eigen::VectorXd w_;
  double eps_;
  int window_;
};

class UpStrategy : public Strategy {
 public:
  UpStrategy(int m, int samples, std::uint64_t seed)
      : samples_(m, samples), wealth_(Eigen::VectorXd::Ones(samples)) {
    Rng rng = Rng(seed).substream("up");
    for (int k = 0; k < samples; ++k) {
      double total = 0.0;
      for (int i = 0; i < m; ++i) {
        double g = -std::log(1.0 - rng.uniform());  // Exp(1)
        samples_(i, k) = g;
        total += g;
      }
      samples_.col(k) /= total;  // Dirichlet(1,...,1)
    }
  }

  std::optional<ActionWeights> target_weights(const MarketEnv& env) override {
    const int t = env.state().t;
    if (t > env.start_t()) {
      Eigen::VectorXd x = day_relatives(env, t);
      wealth_.array() *= (samples_.transpose() * x).array();
    }
    Eigen::VectorXd w = samples_ * wealth_ / wealth_.sum();
    return make_weights(w / w.sum());
  }

 private:
  Eigen::MatrixXd samples_;  // M x N constant rebalanced portfolios
  Eigen::VectorXd wealth_;
};

class AnticorStrategy : public Strategy {
 public:
  AnticorStrategy(int m, int window)
      : w_(uniform_weights(m)), window_(window), history_(0, m) {}
  std::optional<ActionWeights> target_weights(const MarketEnv& env) override {
    const int t = env.state().t;
    if (t > env.start_t()) {
      history_.conservativeResize(history_.rows() + 1, Eigen::NoChange);
      history_.row(history_.rows() - 1) =
          env.panel().log_return.row(t);
    }
    if (history_.rows() >= 2 * window_) {
      w_ = anticor_update(w_, history_, window_);
    }
    return make_weights(w_);
  }

 private:
  Eigen::VectorXd w_;
  int window_;
  Eigen::MatrixXd history_;  // episode log-relatives, most recent last
};

}  // namespace

std::unique_ptr<Strategy> make_strategy(StrategyKind kind, int assets,
                                        const BaselineParams& params,
                                        std::uint64_t seed) {
  switch (kind) {
    case StrategyKind::Bah:
      return std::make_unique<BahStrategy>(assets);
    case StrategyKind::Crp:
      return std::make_unique<CrpStrategy>(assets);
    case StrategyKind::Eg:
      return std::make_unique<EgStrategy>(assets, params.eg_eta);
    case StrategyKind::Pamr:
      return std::make_unique<PamrStrategy>(assets, params.pamr_epsilon);
    case StrategyKind::Olmar:
      return std::make_unique<OlmarStrategy>(assets, params.olmar_epsilon,
                                             params.olmar_window);
    case StrategyKind::Up:
      return std::make_unique<UpStrategy>(assets, params.up_samples, seed);
    case StrategyKind::Anticor:
      return std::make_unique<AnticorStrategy>(assets, params.anticor_window);
  }
  throw std::invalid_argument("unknown strategy kind");
}

}  // namespace pfm
