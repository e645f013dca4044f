#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "pfm/data_ingest.hpp"

namespace pfm {

struct EnvConfig {
  double initial_cash = 1'000'000.0;
  double cost_per_share = 0.001;
  bool cost_enabled = true;
  // Observation entries are raw panel values by default; normalization
  // rescales prices by their episode-start level, RSI to [0,1] and wealth
  // terms by initial cash, which conditions network inputs without changing
  // the accounting.
  bool normalize_obs = false;
  // Multiplier applied to emitted rewards (1.0 = raw currency difference).
  double reward_scale = 1.0;
};

/// Integer share holdings, cash and marked-to-market value at time index t.
struct PortfolioState {
  std::vector<long long> holdings;
  double cash = 0.0;
  double value = 0.0;
  int t = 0;
};

/// Portfolio weight vector on the simplex: w_i in [0,1], sum = 1 (1e-9).
struct ActionWeights {
  Eigen::VectorXd w;
};

/// Validates the simplex invariants; throws std::invalid_argument.
ActionWeights make_weights(Eigen::VectorXd w);

struct StepResult {
  Eigen::VectorXd next_obs;
  double reward = 0.0;
  bool done = false;
  double cost_paid = 0.0;
};

double mark_to_market(const std::vector<long long>& holdings,
                      const Eigen::VectorXd& prices, double cash);

/// Retarget holdings to the given weights at the given prices. Uses the
/// floor formula h_i = floor(investable * w_i / p_i); when costs are enabled
/// the implied cost of the first pass is deducted from investable and the
/// floors recomputed once, which keeps cash non-negative. Returns the new
/// state (same t) and the cost paid.
std::pair<PortfolioState, double> rebalance(const PortfolioState& state,
                                            const ActionWeights& weights,
                                            const Eigen::VectorXd& prices,
                                            const EnvConfig& config);

/// Deterministic daily-rebalancing simulator over an aligned panel.
/// Executes trades at day-t adjusted closes, holds overnight, revalues at
/// day t+1. Reward is the marked value change across the step (so costs
/// lower it); the per-episode reward sum telescopes to V_final - V_initial.
class MarketEnv {
 public:
  MarketEnv(const AlignedPanel& panel, EnvConfig config);

  /// Start an episode with all-cash portfolio. Requires 1 <= start_t <= T-2.
  Eigen::VectorXd reset(int start_t);

  /// Advance one day. nullopt means hold (no trade). Throws when stepping
  /// past the final panel index.
  StepResult step(const std::optional<ActionWeights>& action);

  Eigen::VectorXd observation() const;
  const PortfolioState& state() const { return state_; }
  const AlignedPanel& panel() const { return *panel_; }
  const EnvConfig& config() const { return config_; }
  int start_t() const { return start_t_; }
  int obs_dim() const { return 5 * panel_->assets() + 2; }
  bool done() const { return state_.t >= panel_->rows() - 1; }

 private:
  const AlignedPanel* panel_;
  EnvConfig config_;
  PortfolioState state_;
  int start_t_ = 1;
  Eigen::VectorXd ref_prices_;  // episode-start prices for normalization
};

}  // namespace pfm
