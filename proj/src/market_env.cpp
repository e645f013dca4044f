#include "pfm/market_env.hpp"

#include <cmath>
#include <stdexcept>

namespace pfm {

ActionWeights make_weights(Eigen::VectorXd w) {
  constexpr double eps = 1e-9;
  double sum = 0.0;
  for (int i = 0; i < w.size(); ++i) {
    if (!(w[i] >= -eps && w[i] <= 1.0 + eps)) {
      throw std::invalid_argument("weight " + std::to_string(i) +
                                  " outside [0,1]: " + std::to_string(w[i]));
    }
    sum += w[i];
  }
  if (std::abs(sum - 1.0) > eps) {
    throw std::invalid_argument("weights sum to " + std::to_string(sum) +
                                ", expected 1");
  }
  return ActionWeights{std::move(w)};
}

double mark_to_market(const std::vector<long long>& holdings,
                      const Eigen::VectorXd& prices, double cash) {
  double value = 0.0;
  for (std::size_t i = 0; i < holdings.size(); ++i) {
    value += static_cast<double>(holdings[i]) * prices[static_cast<int>(i)];
  }
  return value + cash;
}

namespace {

std::vector<long long> floor_targets(double investable,
                                     const Eigen::VectorXd& w,
                                     const Eigen::VectorXd& prices) {
  std::vector<long long> h(static_cast<std::size_t>(w.size()));
  for (int i = 0; i < w.size(); ++i) {
    double shares = std::floor(investable * w[i] / prices[i]);
    h[static_cast<std::size_t>(i)] =
        shares > 0.0 ? static_cast<long long>(shares) : 0;
  }
  return h;
}

double turnover(const std::vector<long long>& a,
                const std::vector<long long>& b) {
  double shares = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    shares += static_cast<double>(std::llabs(a[i] - b[i]));
  }
  return shares;
}

}  // namespace

std::pair<PortfolioState, double> rebalance(const PortfolioState& state,
                                            const ActionWeights& weights,
                                            const Eigen::VectorXd& prices,
                                            const EnvConfig& config) {
  if (weights.w.size() != static_cast<Eigen::Index>(state.holdings.size())) {
    throw std::invalid_argument("rebalance: weight/holdings size mismatch");
  }
  if ((prices.array() <= 0.0).any()) {
    throw std::invalid_argument("rebalance: non-positive price");
  }

  const double v_pre = mark_to_market(state.holdings, prices, state.cash);

  std::vector<long long> target = floor_targets(v_pre, weights.w, prices);
  double cost = 0.0;
  if (config.cost_enabled) {
    const double cost_first =
        config.cost_per_share * turnover(target, state.holdings);
    target = floor_targets(v_pre - cost_first, weights.w, prices);
    cost = config.cost_per_share * turnover(target, state.holdings);
  }

  PortfolioState next = state;
  next.holdings = std::move(target);
  double spent = 0.0;
  for (std::size_t i = 0; i < next.holdings.size(); ++i) {
    spent += static_cast<double>(next.holdings[i]) * prices[static_cast<int>(i)];
  }
  next.cash = v_pre - spent - cost;
  if (next.cash < 0.0) {
    throw std::logic_error("rebalance: cost reserve failed, cash " +
                           std::to_string(next.cash));
  }
  next.value = mark_to_market(next.holdings, prices, next.cash);
  return {std::move(next), cost};
}

MarketEnv::MarketEnv(const AlignedPanel& panel, EnvConfig config)
    : panel_(&panel), config_(config) {
  if (config_.initial_cash <= 0.0) {
    throw std::invalid_argument("initial_cash must be positive");
  }
  if (config_.cost_per_share < 0.0) {
    throw std::invalid_argument("cost_per_share must be non-negative");
  }
}

Eigen::VectorXd MarketEnv::reset(int start_t) {
  const int T = panel_->rows();
  if (start_t < 1 || start_t > T - 2) {
    throw std::out_of_range("reset: start_t " + std::to_string(start_t) +
                            " outside [1, " + std::to_string(T - 2) + "]");
  }
  start_t_ = start_t;
  state_.holdings.assign(static_cast<std::size_t>(panel_->assets()), 0);
  state_.cash = config_.initial_cash;
  state_.value = config_.initial_cash;
  state_.t = start_t;
  ref_prices_ = panel_->prices.row(start_t).transpose();
  return observation();
}

Eigen::VectorXd MarketEnv::observation() const {
  const int M = panel_->assets();
  const int t = state_.t;
  Eigen::VectorXd obs(5 * M + 2);
  const bool norm = config_.normalize_obs;
  for (int i = 0; i < M; ++i) {
    const double p = panel_->prices(t, i);
    const double p_prev = panel_->prices(t - 1, i);
    const double ref = norm ? ref_prices_[i] : 1.0;
    obs[5 * i + 0] = p / ref;
    obs[5 * i + 1] = p_prev / ref;
    obs[5 * i + 2] = panel_->log_return(t, i);
    obs[5 * i + 3] = norm ? panel_->rsi2(t, i) / 100.0 : panel_->rsi2(t, i);
    const double h = static_cast<double>(state_.holdings[static_cast<std::size_t>(i)]);
    obs[5 * i + 4] = norm ? h * p / state_.value : h;
  }
  obs[5 * M + 0] = norm ? state_.value / config_.initial_cash : state_.value;
  obs[5 * M + 1] = norm ? state_.cash / state_.value : state_.cash;
  return obs;
}

StepResult MarketEnv::step(const std::optional<ActionWeights>& action) {
  const int t = state_.t;
  const int T = panel_->rows();
  if (t + 1 >= T) {
    throw std::out_of_range("step: past the final panel index");
  }

  const double v_pre = state_.value;  // marked at day-t prices
  double cost = 0.0;
  if (action) {
    Eigen::VectorXd p_t = panel_->prices.row(t).transpose();
    auto [next_state, paid] = rebalance(state_, *action, p_t, config_);
    state_ = std::move(next_state);
    cost = paid;
  }

  state_.t = t + 1;
  Eigen::VectorXd p_next = panel_->prices.row(t + 1).transpose();
  state_.value = mark_to_market(state_.holdings, p_next, state_.cash);

  StepResult result;
  result.reward = (state_.value - v_pre) * config_.reward_scale;
  result.cost_paid = cost;
  result.done = (state_.t == T - 1);
  result.next_obs = observation();
  return result;
}

}  // namespace pfm
