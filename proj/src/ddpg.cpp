#include "pfm/ddpg.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

namespace pfm {

using nn::Mat;

Actor::Actor(int obs_dim, int action_dim, Rng& rng)
    : l1(obs_dim, 256, nn::Act::Relu, rng),
      l2(256, 128, nn::Act::Relu, rng),
      l3(128, 64, nn::Act::Relu, rng),
      out(64, action_dim, nn::Act::Sigmoid, rng) {}

Mat Actor::forward(const Mat& obs) {
  return out.forward(l3.forward(l2.forward(l1.forward(obs))));
}

Mat Actor::backward(const Mat& dy) {
  return l1.backward(l2.backward(l3.backward(out.backward(dy))));
}

void Actor::zero_grad() {
  l1.zero_grad();
  l2.zero_grad();
  l3.zero_grad();
  out.zero_grad();
}

std::vector<nn::Param> Actor::params(const std::string& prefix) {
  std::vector<nn::Param> all;
  for (auto& p : l1.params(prefix + ".l1")) all.push_back(p);
  for (auto& p : l2.params(prefix + ".l2")) all.push_back(p);
  for (auto& p : l3.params(prefix + ".l3")) all.push_back(p);
  for (auto& p : out.params(prefix + ".out")) all.push_back(p);
  return all;
}

Critic::Critic(int input_dim, Rng& rng, double dropout_rate)
    : l1(input_dim, 100, rng),
      l2(100, 100, rng),
      drop1(dropout_rate),
      drop2(dropout_rate),
      fc(100, 50, nn::Act::Relu, rng),
      out(50, 1, nn::Act::Identity, rng) {}

Mat Critic::forward(const Mat& state_action, bool training, Rng* rng) {
  // Length-1 sequence; hidden state reset each evaluation.
  Mat h1 = l1.forward({state_action}).front();
  Mat h1d = drop1.forward(h1, training, rng);
  Mat h2 = l2.forward({h1d}).front();
  Mat h2d = drop2.forward(h2, training, rng);
  return out.forward(fc.forward(h2d));
}

Mat Critic::backward(const Mat& dq) {
  Mat dh2d = fc.backward(out.backward(dq));
  Mat dh2 = drop2.backward(dh2d);
  Mat dh1d = l2.backward({dh2}).front();
  Mat dh1 = drop1.backward(dh1d);
  return l1.backward({dh1}).front();
}

void Critic::zero_grad() {
  l1.zero_grad();
  l2.zero_grad();
  fc.zero_grad();
  out.zero_grad();
}

std::vector<nn::Param> Critic::params(const std::string& prefix) {
  std::vector<nn::Param> all;
  for (auto& p : l1.params(prefix + ".l1")) all.push_back(p);
  for (auto& p : l2.params(prefix + ".l2")) all.push_back(p);
  for (auto& p : fc.params(prefix + ".fc")) all.push_back(p);
  for (auto& p : out.params(prefix + ".out")) all.push_back(p);
  return all;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("replay capacity must be > 0");
  ring_.reserve(std::min<std::size_t>(capacity, 4096));
}

void ReplayBuffer::push(Transition t) {
  if (ring_.size() < capacity_) {
    ring_.push_back(std::move(t));
  } else {
    ring_[head_] = std::move(t);
    head_ = (head_ + 1) % capacity_;
  }
}

const Transition& ReplayBuffer::at(std::size_t logical) const {
  if (logical >= ring_.size()) throw std::out_of_range("replay index");
  if (ring_.size() < capacity_) return ring_[logical];
  return ring_[(head_ + logical) % capacity_];
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t batch,
                                                    Rng& rng) const {
  if (batch > ring_.size()) {
    throw std::invalid_argument("replay sample larger than buffer");
  }
  // Floyd's sampling without replacement.
  std::unordered_set<std::size_t> chosen;
  std::vector<const Transition*> out;
  out.reserve(batch);
  for (std::size_t j = ring_.size() - batch; j < ring_.size(); ++j) {
    std::size_t k = static_cast<std::size_t>(rng.below(j + 1));
    if (!chosen.insert(k).second) {
      chosen.insert(j);
      out.push_back(&ring_[j]);
    } else {
      out.push_back(&ring_[k]);
    }
  }
  return out;
}

OuNoise::OuNoise(int dim, double theta, double mu, double sigma, double dt)
    : theta(theta), mu(mu), sigma(sigma), dt(dt) {
  x = Eigen::VectorXd::Constant(dim, mu);
}

void OuNoise::reset() { x.setConstant(mu); }

Eigen::VectorXd OuNoise::sample(Rng& rng) {
  const double diffusion = sigma * std::sqrt(dt);
  for (int i = 0; i < x.size(); ++i) {
    x[i] += theta * (mu - x[i]) * dt + diffusion * rng.gaussian();
  }
  return x;
}

double epsilon_for(const TrainConfig& config, long long states_experienced) {
  if (states_experienced < 0) {
    throw std::invalid_argument("epsilon: negative state count");
  }
  std::size_t bucket = 0;
  while (bucket < config.eps_thresholds.size() &&
         states_experienced >= config.eps_thresholds[bucket]) {
    ++bucket;
  }
  return config.eps_values.at(bucket);
}

Eigen::VectorXd normalize_weights(const Eigen::VectorXd& raw) {
  const double sum = raw.sum();
  if (sum < 1e-8) {
    return Eigen::VectorXd::Constant(raw.size(),
                                     1.0 / static_cast<double>(raw.size()));
  }
  return raw / sum;
}

std::string TrainLog::to_csv() const {
  std::string out = "epoch,step,reward_sum,critic_loss,actor_loss,epsilon\n";
  char buf[160];
  for (const auto& e : episodes) {
    std::snprintf(buf, sizeof(buf), "%d,%lld,%.17g,%.17g,%.17g,%.17g\n", e.epoch,
                  e.steps, e.reward_sum, e.mean_critic_loss, e.mean_actor_loss,
                  e.epsilon_end);
    out += buf;
  }
  return out;
}

DdpgAgent::DdpgAgent(int assets, TrainConfig config)
    : assets_(assets),
      config_(config),
      buffer_(config.buffer_capacity),
      actor_opt_(config.actor_lr),
      critic_opt_(config.critic_lr),
      rng_dropout_(Rng(config.seed).substream("dropout")) {
  if (config_.eps_values.size() != config_.eps_thresholds.size() + 1) {
    throw std::invalid_argument("epsilon schedule needs thresholds+1 values");
  }
  Rng init = Rng(config_.seed).substream("init");
  const int obs = obs_dim();
  actor_ = std::make_unique<Actor>(obs, assets_, init);
  critic_ = std::make_unique<Critic>(obs + assets_, init);
  target_actor_ = std::make_unique<Actor>(*actor_);
  target_critic_ = std::make_unique<Critic>(*critic_);
}

ActionWeights DdpgAgent::act(const Eigen::VectorXd& obs, bool explore,
                             double epsilon, OuNoise& noise, Rng& rng) {
  Mat raw = actor_->forward(obs);
  Eigen::VectorXd a = raw.col(0);
  if (explore && rng.uniform() < epsilon) {
    a += noise.sample(rng);
    a = a.cwiseMax(0.0).cwiseMin(1.0);
  }
  return make_weights(normalize_weights(a));
}

Eigen::VectorXd DdpgAgent::greedy_weights(const Eigen::VectorXd& obs) {
  return normalize_weights(actor_->forward(obs).col(0));
}

namespace {

// Column-wise simplex normalization n = a / sum(a). The policy the critic
// sees is always the executed (normalized) action, so actor gradients must
// flow through this map as well.
Mat normalize_columns(const Mat& a) {
  Mat n = a;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    n.col(j) /= std::max(a.col(j).sum(), 1e-8);
  }
  return n;
}

// Pull dQ/dn back through the normalization: da_i = (dn_i - dn.n) / sum(a).
Mat normalize_backward(const Mat& a, const Mat& n, const Mat& dn) {
  Mat da = dn;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    const double s = std::max(a.col(j).sum(), 1e-8);
    const double mix = dn.col(j).dot(n.col(j));
    da.col(j) = (dn.col(j).array() - mix) / s;
  }
  return da;
}

}  // namespace

Eigen::RowVectorXd DdpgAgent::critic_targets(
    const std::vector<const Transition*>& batch) {
  const int B = static_cast<int>(batch.size());
  Mat s_next(obs_dim(), B);
  for (int j = 0; j < B; ++j) s_next.col(j) = batch[static_cast<std::size_t>(j)]->s_next;
  Mat a_next = normalize_columns(target_actor_->forward(s_next));
  Mat sa(obs_dim() + assets_, B);
  sa.topRows(obs_dim()) = s_next;
  sa.bottomRows(assets_) = a_next;
  Mat q = target_critic_->forward(sa, false, nullptr);

  Eigen::RowVectorXd y(B);
  for (int j = 0; j < B; ++j) {
    const Transition& t = *batch[static_cast<std::size_t>(j)];
    y[j] = t.done ? t.r : t.r + config_.gamma * q(0, j);
  }
  return y;
}

double DdpgAgent::update_critic(const std::vector<const Transition*>& batch) {
  const int B = static_cast<int>(batch.size());
  Eigen::RowVectorXd y = critic_targets(batch);

  Mat sa(obs_dim() + assets_, B);
  for (int j = 0; j < B; ++j) {
    const Transition& t = *batch[static_cast<std::size_t>(j)];
    if (t.a.size() != assets_) {
      throw std::invalid_argument("update_critic: action dimension mismatch");
    }
    sa.col(j).head(obs_dim()) = t.s;
    sa.col(j).tail(assets_) = t.a;
  }

  Mat q_pred = critic_->forward(sa, true, &rng_dropout_);
  nn::HuberResult h = nn::huber_loss(Mat(y), q_pred, 1.0);
  critic_->zero_grad();
  critic_->backward(h.grad);
  critic_opt_.step(critic_->params("critic"));
  return h.loss;
}

double DdpgAgent::update_actor(const std::vector<const Transition*>& batch) {
  const int B = static_cast<int>(batch.size());
  Mat s(obs_dim(), B);
  for (int j = 0; j < B; ++j) s.col(j) = batch[static_cast<std::size_t>(j)]->s;

  Mat a = actor_->forward(s);
  Mat n = normalize_columns(a);
  Mat sa(obs_dim() + assets_, B);
  sa.topRows(obs_dim()) = s;
  sa.bottomRows(assets_) = n;
  Mat q = critic_->forward(sa, false, nullptr);
  const double loss = -q.sum();

  Mat dq = Mat::Constant(1, B, -1.0);
  critic_->zero_grad();
  Mat dsa = critic_->backward(dq);
  actor_->zero_grad();
  actor_->backward(normalize_backward(a, n, dsa.bottomRows(assets_)));
  actor_opt_.step(actor_->params("actor"));
  return loss;
}

void DdpgAgent::soft_update_targets() {
  nn::soft_update(actor_->params("actor"), target_actor_->params("actor"),
                  config_.tau);
  nn::soft_update(critic_->params("critic"), target_critic_->params("critic"),
                  config_.tau);
}

TrainLog DdpgAgent::train(const AlignedPanel& panel, const EnvConfig& env_config,
                          int start_t, int end_t) {
  if (end_t <= start_t || end_t > panel.rows() - 1) {
    throw std::invalid_argument("train: bad episode range [" +
                                std::to_string(start_t) + "," +
                                std::to_string(end_t) + "]");
  }

  Rng root(config_.seed);
  Rng rng_explore = root.substream("explore");
  Rng rng_sample = root.substream("sample");

  MarketEnv env(panel, env_config);
  OuNoise noise(assets_, config_.ou_theta, config_.ou_mu, config_.ou_sigma,
                config_.ou_dt);

  TrainLog log;
  long long global_step = 0;
  for (int epoch = 0; epoch < config_.epochs; ++epoch) {
    Eigen::VectorXd obs = env.reset(start_t);
    noise.reset();

    EpisodeLog ep;
    ep.epoch = epoch;
    double critic_loss_sum = 0.0, actor_loss_sum = 0.0;
    long long updates = 0;
    double eps = epsilon_for(config_, states_experienced_);

    for (int t = start_t; t < end_t; ++t) {
      eps = epsilon_for(config_, states_experienced_);
      ActionWeights a = act(obs, true, eps, noise, rng_explore);
      StepResult sr = env.step(a);
      const bool done = (t + 1 == end_t);

      buffer_.push({obs, a.w, sr.reward, sr.next_obs, done});
      ++states_experienced_;
      ++global_step;
      ep.reward_sum += sr.reward;
      ++ep.steps;

      if (buffer_.size() >= static_cast<std::size_t>(config_.batch) &&
          global_step % config_.update_every == 0) {
        auto batch = buffer_.sample(static_cast<std::size_t>(config_.batch),
                                    rng_sample);
        critic_loss_sum += update_critic(batch);
        actor_loss_sum += update_actor(batch);
        soft_update_targets();
        ++updates;
      }
      obs = sr.next_obs;
    }

    ep.mean_critic_loss = updates ? critic_loss_sum / static_cast<double>(updates) : 0.0;
    ep.mean_actor_loss = updates ? actor_loss_sum / static_cast<double>(updates) : 0.0;
    ep.epsilon_end = eps;
    log.episodes.push_back(ep);
  }
  return log;
}

namespace {

nlohmann::json mat_to_json(const Mat& m) {
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

void mat_from_json(const nlohmann::json& j, Mat& m) {
  const Eigen::Index rows = j.at("rows"), cols = j.at("cols");
  if (rows != m.rows() || cols != m.cols()) {
    throw std::runtime_error("checkpoint: shape mismatch, expected " +
                             std::to_string(m.rows()) + "x" +
                             std::to_string(m.cols()) + ", got " +
                             std::to_string(rows) + "x" + std::to_string(cols));
  }
  const auto& data = j.at("data");
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index jj = 0; jj < cols; ++jj) m(i, jj) = data.at(k++);
  }
}

nlohmann::json config_to_json(const TrainConfig& c) {
  return {{"gamma", c.gamma},
          {"tau", c.tau},
          {"batch", c.batch},
          {"eps_thresholds", c.eps_thresholds},
          {"eps_values", c.eps_values},
          {"buffer_capacity", c.buffer_capacity},
          {"actor_lr", c.actor_lr},
          {"critic_lr", c.critic_lr},
          {"epochs", c.epochs},
          {"update_every", c.update_every},
          {"seed", c.seed},
          {"ou_theta", c.ou_theta},
          {"ou_mu", c.ou_mu},
          {"ou_sigma", c.ou_sigma},
          {"ou_dt", c.ou_dt}};
}

TrainConfig config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.gamma = j.at("gamma");
  c.tau = j.at("tau");
  c.batch = j.at("batch");
  c.eps_thresholds = j.at("eps_thresholds").get<std::vector<long long>>();
  c.eps_values = j.at("eps_values").get<std::vector<double>>();
  c.buffer_capacity = j.at("buffer_capacity");
  c.actor_lr = j.at("actor_lr");
  c.critic_lr = j.at("critic_lr");
  c.epochs = j.at("epochs");
  c.update_every = j.at("update_every");
  c.seed = j.at("seed");
  c.ou_theta = j.at("ou_theta");
  c.ou_mu = j.at("ou_mu");
  c.ou_sigma = j.at("ou_sigma");
  c.ou_dt = j.at("ou_dt");
  return c;
}

}  // namespace

std::string DdpgAgent::save_checkpoint() const {
  auto* self = const_cast<DdpgAgent*>(this);
  nlohmann::json j;
  j["format"] = "pfm-checkpoint-1";
  j["assets"] = assets_;
  j["train_config"] = config_to_json(config_);
  j["states_experienced"] = states_experienced_;
  nlohmann::json params = nlohmann::json::object();
  for (auto& p : self->actor_->params("actor")) params[p.name] = mat_to_json(*p.value);
  for (auto& p : self->critic_->params("critic")) params[p.name] = mat_to_json(*p.value);
  for (auto& p : self->target_actor_->params("target_actor")) params[p.name] = mat_to_json(*p.value);
  for (auto& p : self->target_critic_->params("target_critic")) params[p.name] = mat_to_json(*p.value);
  j["params"] = params;
  return j.dump(2);
}

DdpgAgent DdpgAgent::load_checkpoint(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("checkpoint: invalid json: ") +
                             e.what());
  }
  if (!j.contains("format") || j.at("format") != "pfm-checkpoint-1") {
    throw std::runtime_error("checkpoint: unknown format");
  }
  try {
    DdpgAgent agent(j.at("assets"), config_from_json(j.at("train_config")));
    agent.states_experienced_ = j.at("states_experienced");
    const auto& params = j.at("params");
    for (auto& p : agent.actor_->params("actor")) mat_from_json(params.at(p.name), *p.value);
    for (auto& p : agent.critic_->params("critic")) mat_from_json(params.at(p.name), *p.value);
    for (auto& p : agent.target_actor_->params("target_actor")) mat_from_json(params.at(p.name), *p.value);
    for (auto& p : agent.target_critic_->params("target_critic")) mat_from_json(params.at(p.name), *p.value);
    return agent;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("checkpoint: malformed: ") + e.what());
  }
}

}  // namespace pfm
