#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pfm/market_env.hpp"
#include "pfm/rng.hpp"

namespace pfm {

enum class StrategyKind { Anticor, Bah, Crp, Eg, Olmar, Pamr, Up };

const std::vector<StrategyKind>& all_strategy_kinds();
std::string strategy_name(StrategyKind kind);

struct BaselineParams {
  double eg_eta = 0.05;
  double olmar_epsilon = 10.0;
  int olmar_window = 5;
  double pamr_epsilon = 0.5;
  int up_samples = 100000;
  int anticor_window = 5;
};

/// Euclidean projection onto the probability simplex (sort-and-threshold).
Eigen::VectorXd simplex_project(const Eigen::VectorXd& v);

/// Multiplicative-update step: w_i * exp(eta * x_i / (w.x)) renormalized.
Eigen::VectorXd eg_update(const Eigen::VectorXd& w, const Eigen::VectorXd& x,
                          double eta);

/// Mean-reversion step toward the predicted relatives x_tilde; keeps w when
/// the margin constraint w.x_tilde >= epsilon already holds or no update
/// direction exists.
Eigen::VectorXd olmar_update(const Eigen::VectorXd& w,
                             const Eigen::VectorXd& x_tilde, double epsilon);

/// Predicted price relatives MA_window(p) / p_t from the panel at day t.
Eigen::VectorXd olmar_predict(const AlignedPanel& panel, int t, int window);

/// Passive-aggressive step away from the realized relatives when the
/// mean-reversion loss max(0, w.x - epsilon) is positive.
Eigen::VectorXd pamr_update(const Eigen::VectorXd& w, const Eigen::VectorXd& x,
                            double epsilon);

/// Anticor transfer step over two adjacent windows of log-relatives
/// (2*window rows, most recent last). Keeps w on insufficient variance.
Eigen::VectorXd anticor_update(const Eigen::VectorXd& w,
                               const Eigen::MatrixXd& log_relatives,
                               int window);

/// A daily weight-producing rule driven through the shared market
/// environment. Returning nullopt means hold (no trade today).
class Strategy {
 public:
  virtual ~Strategy() = default;
  virtual std::optional<ActionWeights> target_weights(const MarketEnv& env) = 0;
};

std::unique_ptr<Strategy> make_strategy(StrategyKind kind, int assets,
                                        const BaselineParams& params,
                                        std::uint64_t seed);

}  // namespace pfm
