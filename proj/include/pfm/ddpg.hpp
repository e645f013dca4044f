#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <string>
#include <vector>

#include "pfm/market_env.hpp"
#include "pfm/neural.hpp"
#include "pfm/rng.hpp"

namespace pfm {

/// FC policy network: obs -> 256 -> 128 -> 64 -> M, relu hidden layers,
/// sigmoid output so every raw action entry lies in (0,1).
struct Actor {
  Actor(int obs_dim, int action_dim, Rng& rng);

  nn::Mat forward(const nn::Mat& obs);
  nn::Mat backward(const nn::Mat& dy);
  void zero_grad();
  std::vector<nn::Param> params(const std::string& prefix);

  nn::Dense l1, l2, l3, out;
};

/// Value network over the concatenated [state; action] vector: two stacked
/// LSTM layers of hidden size 100 with dropout 0.35 between them and before
/// the FC(50) layer, then a scalar head. The concatenated vector is fed as a
/// length-1 sequence with hidden state reset on every evaluation.
struct Critic {
  Critic(int input_dim, Rng& rng, double dropout_rate = 0.35);

  nn::Mat forward(const nn::Mat& state_action, bool training, Rng* rng);
  nn::Mat backward(const nn::Mat& dq);
  void zero_grad();
  std::vector<nn::Param> params(const std::string& prefix);

  nn::Lstm l1, l2;
  nn::Dropout drop1, drop2;
  nn::Dense fc, out;
};

struct Transition {
  Eigen::VectorXd s;
  Eigen::VectorXd a;  // executed normalized weights
  double r = 0.0;
  Eigen::VectorXd s_next;
  bool done = false;
};

/// FIFO ring with uniform sampling without replacement within a batch.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return ring_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& at(std::size_t logical) const;  // 0 = oldest

  std::vector<const Transition*> sample(std::size_t batch, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::vector<Transition> ring_;
  std::size_t head_ = 0;  // next write slot once full
};

/// Discretized Ornstein-Uhlenbeck process:
/// x += theta * (mu - x) * dt + sigma * sqrt(dt) * N(0, I).
struct OuNoise {
  double theta = 0.15;
  double mu = 0.0;
  double sigma = 0.2;
  double dt = 1.0;
  Eigen::VectorXd x;

  explicit OuNoise(int dim, double theta = 0.15, double mu = 0.0,
                   double sigma = 0.2, double dt = 1.0);
  void reset();
  Eigen::VectorXd sample(Rng& rng);
};

struct TrainConfig {
  double gamma = 0.99;
  double tau = 0.09;
  int batch = 128;
  std::vector<long long> eps_thresholds{1000, 2000};
  std::vector<double> eps_values{0.5, 0.25, 0.1};
  std::size_t buffer_capacity = 100000;
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  int epochs = 1;
  int update_every = 1;  // gradient step cadence in environment steps
  std::uint64_t seed = 0;
  double ou_theta = 0.15;
  double ou_mu = 0.0;
  double ou_sigma = 0.2;
  double ou_dt = 1.0;
};

/// Piecewise exploration rate from the stratified schedule.
double epsilon_for(const TrainConfig& config, long long states_experienced);

/// Normalize a raw non-negative vector onto the simplex; uniform fallback
/// when the mass is below 1e-8.
Eigen::VectorXd normalize_weights(const Eigen::VectorXd& raw);

struct EpisodeLog {
  int epoch = 0;
  long long steps = 0;
  double reward_sum = 0.0;
  double mean_critic_loss = 0.0;
  double mean_actor_loss = 0.0;
  double epsilon_end = 0.0;
};

struct TrainLog {
  std::vector<EpisodeLog> episodes;
  std::string to_csv() const;
};

class DdpgAgent {
 public:
  DdpgAgent(int assets, TrainConfig config);

  /// Policy action. With explore set, an epsilon-gated OU perturbation is
  /// added to the raw sigmoid outputs (clamped to [0,1]) before the simplex
  /// normalization.
  ActionWeights act(const Eigen::VectorXd& obs, bool explore, double epsilon,
                    OuNoise& noise, Rng& rng);
  /// Deterministic (no-noise) policy.
  Eigen::VectorXd greedy_weights(const Eigen::VectorXd& obs);

  /// Bootstrapped targets y = r + gamma * Q'(s', A'(s')) (r when terminal).
  Eigen::RowVectorXd critic_targets(const std::vector<const Transition*>& batch);

  double update_critic(const std::vector<const Transition*>& batch);
  double update_actor(const std::vector<const Transition*>& batch);
  void soft_update_targets();

  TrainLog train(const AlignedPanel& panel, const EnvConfig& env_config,
                 int start_t, int end_t);

  std::string save_checkpoint() const;
  static DdpgAgent load_checkpoint(const std::string& json_text);

  int assets() const { return assets_; }
  int obs_dim() const { return 5 * assets_ + 2; }
  const TrainConfig& config() const { return config_; }
  long long states_experienced() const { return states_experienced_; }

  Actor& actor() { return *actor_; }
  Critic& critic() { return *critic_; }
  Actor& target_actor() { return *target_actor_; }
  Critic& target_critic() { return *target_critic_; }
  ReplayBuffer& buffer() { return buffer_; }

 private:
  int assets_;
  TrainConfig config_;
  std::unique_ptr<Actor> actor_, target_actor_;
  std::unique_ptr<Critic> critic_, target_critic_;
  ReplayBuffer buffer_;
  nn::Adam actor_opt_, critic_opt_;
  long long states_experienced_ = 0;
  Rng rng_dropout_;
};

}  // namespace pfm
