#include <doctest.h>

#include <cmath>
#include <set>

#include "pfm/ddpg.hpp"
#include "test_util.hpp"

using namespace pfm;

TEST_CASE("epsilon schedule strata") {
  TrainConfig cfg;
  CHECK(epsilon_for(cfg, 0) == 0.5);
  CHECK(epsilon_for(cfg, 999) == 0.5);
  CHECK(epsilon_for(cfg, 1000) == 0.25);
  CHECK(epsilon_for(cfg, 1999) == 0.25);
  CHECK(epsilon_for(cfg, 2000) == 0.1);
  CHECK(epsilon_for(cfg, 1000000) == 0.1);
}

TEST_CASE("normalize_weights") {
  Eigen::VectorXd raw(4);
  raw << 1, 2, 3, 4;
  auto w = normalize_weights(raw);
  CHECK(w.sum() == doctest::Approx(1.0));
  CHECK(w(3) == doctest::Approx(0.4));

  // near-zero mass falls back to uniform
  Eigen::VectorXd tiny = Eigen::VectorXd::Constant(4, 1e-12);
  auto u = normalize_weights(tiny);
  for (int i = 0; i < 4; ++i) CHECK(u(i) == doctest::Approx(0.25));
}

TEST_CASE("replay buffer ring semantics") {
  ReplayBuffer buf(3);
  auto tr = [](double r) {
    Transition t;
    t.s = Eigen::VectorXd::Constant(1, r);
    t.a = Eigen::VectorXd::Constant(1, 1.0);
    t.r = r;
    t.s_next = t.s;
    return t;
  };
  buf.push(tr(1));
  buf.push(tr(2));
  CHECK(buf.size() == 2);
  CHECK(buf.at(0).r == 1);
  buf.push(tr(3));
  buf.push(tr(4));  // evicts the oldest
  CHECK(buf.size() == 3);
  CHECK(buf.at(0).r == 2);
  CHECK(buf.at(2).r == 4);
}

TEST_CASE("replay sampling is without replacement and uniform-ish") {
  ReplayBuffer buf(100);
  for (int i = 0; i < 100; ++i) {
    Transition t;
    t.s = Eigen::VectorXd::Constant(1, i);
    t.a = Eigen::VectorXd::Constant(1, 1.0);
    t.r = i;
    t.s_next = t.s;
    buf.push(std::move(t));
  }
  Rng rng(17);
  std::vector<long long> counts(100, 0);
  for (int rep = 0; rep < 500; ++rep) {
    auto batch = buf.sample(20, rng);
    REQUIRE(batch.size() == 20);
    std::set<double> seen;
    for (auto* t : batch) {
      CHECK(seen.insert(t->r).second);  // no duplicates in one batch
      counts[static_cast<std::size_t>(t->r)]++;
    }
  }
  // every slot drawn at least once across 10000 draws of 20/100
  for (long long c : counts) CHECK(c > 0);
  CHECK_THROWS_AS(buf.sample(101, rng), std::invalid_argument);
}

TEST_CASE("ou noise statistics") {
  OuNoise noise(1);
  Rng rng(31);
  const int n = 200000;
  std::vector<double> xs;
  xs.reserve(n);
  for (int i = 0; i < n; ++i) xs.push_back(noise.sample(rng)(0));
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= n - 1;
  // discrete-time stationary variance sigma^2 dt / (2 theta - theta^2 dt)
  const double var_expect = 0.2 * 0.2 / (2 * 0.15 - 0.15 * 0.15);
  CHECK(std::abs(mean) < 0.02);
  CHECK(var == doctest::Approx(var_expect).epsilon(0.05));

  double ac = 0.0;
  for (int i = 1; i < n; ++i) ac += (xs[i] - mean) * (xs[i - 1] - mean);
  ac /= (n - 1) * var;
  CHECK(ac == doctest::Approx(1.0 - 0.15).epsilon(0.02));

  noise.reset();
  CHECK(noise.x(0) == 0.0);
}

TEST_CASE("actor output is a valid action in (0,1)") {
  Rng rng(1);
  Actor actor(42, 8, rng);
  nn::Mat obs = nn::uniform_init(42, 5, 2.0, rng);
  nn::Mat y = actor.forward(obs);
  CHECK(y.rows() == 8);
  CHECK(y.cols() == 5);
  CHECK(y.minCoeff() > 0.0);
  CHECK(y.maxCoeff() < 1.0);
}

TEST_CASE("critic is scalar and deterministic in eval mode") {
  Rng rng(2);
  Critic critic(50, rng);
  nn::Mat sa = nn::uniform_init(50, 3, 1.0, rng);
  nn::Mat q1 = critic.forward(sa, false, nullptr);
  nn::Mat q2 = critic.forward(sa, false, nullptr);
  CHECK(q1.rows() == 1);
  CHECK(q1.cols() == 3);
  CHECK((q1 - q2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("actor and critic end-to-end gradient check") {
  Rng rng(3);
  const int M = 2;
  Actor actor(5 * M + 2, M, rng);
  Critic critic(5 * M + 2 + M, rng);
  nn::Mat obs = nn::uniform_init(5 * M + 2, 4, 1.0, rng);
  nn::Mat target = nn::uniform_init(1, 4, 1.0, rng);

  SUBCASE("critic huber gradients") {
    auto loss_fn = [&]() {
      nn::Mat sa(5 * M + 2 + M, 4);
      sa << obs, actor.forward(obs);
      return nn::huber_loss(target, critic.forward(sa, false, nullptr)).loss;
    };
    critic.zero_grad();
    nn::Mat sa(5 * M + 2 + M, 4);
    sa << obs, actor.forward(obs);
    auto h = nn::huber_loss(target, critic.forward(sa, false, nullptr));
    critic.backward(h.grad);
    auto report = nn::grad_check(critic.params("critic"), loss_fn);
    CHECK(report.max_rel_err < 2e-4);
  }

  SUBCASE("actor gradients through the frozen critic") {
    auto loss_fn = [&]() {
      nn::Mat sa(5 * M + 2 + M, 4);
      sa << obs, actor.forward(obs);
      return -critic.forward(sa, false, nullptr).sum();
    };
    actor.zero_grad();
    critic.zero_grad();
    nn::Mat sa(5 * M + 2 + M, 4);
    sa << obs, actor.forward(obs);
    critic.forward(sa, false, nullptr);
    nn::Mat dq = nn::Mat::Constant(1, 4, -1.0);
    nn::Mat dsa = critic.backward(dq);
    actor.backward(dsa.bottomRows(M));
    auto report = nn::grad_check(actor.params("actor"), loss_fn);
    CHECK(report.max_rel_err < 2e-4);
  }
}

TEST_CASE("critic targets bootstrap except at terminals") {
  TrainConfig cfg;
  cfg.gamma = 0.9;
  cfg.seed = 11;
  DdpgAgent agent(2, cfg);

  Transition terminal, middle;
  terminal.s = Eigen::VectorXd::Zero(12);
  terminal.a = Eigen::VectorXd::Constant(2, 0.5);
  terminal.r = 7.0;
  terminal.s_next = Eigen::VectorXd::Zero(12);
  terminal.done = true;
  middle = terminal;
  middle.done = false;
  middle.r = 1.0;

  auto y = agent.critic_targets({&terminal, &middle});
  CHECK(y(0) == 7.0);  // no bootstrap on done

  // reproduce the bootstrap by hand with the target networks
  nn::Mat obs = middle.s_next;
  nn::Mat a = agent.target_actor().forward(obs);
  nn::Mat sa(14, 1);
  sa << obs, a;
  double q = agent.target_critic().forward(sa, false, nullptr)(0, 0);
  CHECK(y(1) == doctest::Approx(1.0 + 0.9 * q));
}

TEST_CASE("update_critic reduces the fitting loss on a fixed batch") {
  TrainConfig cfg;
  cfg.seed = 5;
  cfg.batch = 8;
  DdpgAgent agent(2, cfg);
  Rng rng(12);
  std::vector<Transition> storage;
  for (int i = 0; i < 8; ++i) {
    Transition t;
    t.s = nn::uniform_init(12, 1, 1.0, rng).col(0);
    t.a = normalize_weights(Eigen::VectorXd::Random(2).cwiseAbs());
    t.r = rng.uniform(-1.0, 1.0);
    t.s_next = nn::uniform_init(12, 1, 1.0, rng).col(0);
    t.done = true;  // fixed targets: y = r
    storage.push_back(std::move(t));
  }
  std::vector<const Transition*> batch;
  for (auto& t : storage) batch.push_back(&t);

  double first = agent.update_critic(batch);
  double last = first;
  for (int i = 0; i < 200; ++i) last = agent.update_critic(batch);
  CHECK(last < first * 0.5);
}

TEST_CASE("update_actor raises the critic's value of the policy") {
  TrainConfig cfg;
  cfg.seed = 6;
  cfg.actor_lr = 1e-3;
  DdpgAgent agent(2, cfg);
  Rng rng(13);
  std::vector<Transition> storage(16);
  for (auto& t : storage) {
    t.s = nn::uniform_init(12, 1, 1.0, rng).col(0);
    t.a = Eigen::VectorXd::Constant(2, 0.5);
    t.s_next = t.s;
    t.done = true;
  }
  std::vector<const Transition*> batch;
  for (auto& t : storage) batch.push_back(&t);

  auto policy_value = [&]() {
    double total = 0.0;
    for (auto* t : batch) {
      nn::Mat a = agent.actor().forward(t->s);
      a /= a.sum();  // the critic sees executed (normalized) actions
      nn::Mat sa(14, 1);
      sa << nn::Mat(t->s), a;
      total += agent.critic().forward(sa, false, nullptr)(0, 0);
    }
    return total;
  };
  double before = policy_value();
  double loss0 = agent.update_actor(batch);
  CHECK(loss0 == doctest::Approx(-before).epsilon(1e-9));
  for (int i = 0; i < 50; ++i) agent.update_actor(batch);
  CHECK(policy_value() > before);
}

TEST_CASE("soft update moves targets toward online nets") {
  TrainConfig cfg;
  cfg.seed = 7;
  cfg.tau = 0.09;
  DdpgAgent agent(2, cfg);
  // online and target actors start identical
  auto po = agent.actor().params("a");
  auto pt = agent.target_actor().params("a");
  CHECK((*po[0].value - *pt[0].value).cwiseAbs().maxCoeff() == 0.0);

  po[0].value->array() += 1.0;
  agent.soft_update_targets();
  double diff = (*po[0].value - *pt[0].value).cwiseAbs().maxCoeff();
  CHECK(diff == doctest::Approx(0.91).epsilon(1e-9));
}

TEST_CASE("checkpoint round trip preserves the policy bit for bit") {
  TrainConfig cfg;
  cfg.seed = 8;
  DdpgAgent agent(2, cfg);
  Rng rng(21);
  Eigen::VectorXd obs = nn::uniform_init(12, 1, 1.0, rng).col(0);
  auto before = agent.greedy_weights(obs);

  auto text = agent.save_checkpoint();
  auto loaded = DdpgAgent::load_checkpoint(text);
  auto after = loaded.greedy_weights(obs);
  CHECK((before - after).cwiseAbs().maxCoeff() == 0.0);
  CHECK(loaded.config().tau == cfg.tau);

  CHECK_THROWS_AS(DdpgAgent::load_checkpoint("{}"), std::runtime_error);
}

TEST_CASE("training is deterministic for a fixed seed") {
  auto panel = pfm_test::drift_panel(40);
  EnvConfig env_cfg;
  env_cfg.normalize_obs = true;
  env_cfg.reward_scale = 1e-4;
  TrainConfig cfg;
  cfg.seed = 42;
  cfg.epochs = 2;
  cfg.batch = 16;

  DdpgAgent a(2, cfg), b(2, cfg);
  auto log_a = a.train(panel, env_cfg, 1, 38);
  auto log_b = b.train(panel, env_cfg, 1, 38);
  REQUIRE(log_a.episodes.size() == 2);
  REQUIRE(log_b.episodes.size() == 2);
  for (std::size_t i = 0; i < log_a.episodes.size(); ++i) {
    CHECK(log_a.episodes[i].reward_sum == log_b.episodes[i].reward_sum);
    CHECK(log_a.episodes[i].mean_critic_loss == log_b.episodes[i].mean_critic_loss);
  }
  CHECK(a.save_checkpoint() == b.save_checkpoint());

  TrainConfig other = cfg;
  other.seed = 43;
  DdpgAgent c(2, other);
  auto log_c = c.train(panel, env_cfg, 1, 38);
  CHECK(log_c.episodes[1].reward_sum != log_a.episodes[1].reward_sum);

  CHECK(log_a.to_csv().find("reward_sum") != std::string::npos);
}

TEST_CASE("act explores only through the epsilon gate") {
  TrainConfig cfg;
  cfg.seed = 9;
  DdpgAgent agent(2, cfg);
  OuNoise noise(2);
  Rng rng(50);
  Eigen::VectorXd obs = Eigen::VectorXd::Zero(12);

  // epsilon 0: exploration path disabled, equal to the greedy policy
  auto w = agent.act(obs, true, 0.0, noise, rng);
  auto g = normalize_weights(agent.greedy_weights(obs));
  CHECK((w.w - g).cwiseAbs().maxCoeff() == 0.0);

  // epsilon 1: noise always applied; still a valid simplex point
  auto w2 = agent.act(obs, true, 1.0, noise, rng);
  CHECK(w2.w.sum() == doctest::Approx(1.0));
  CHECK(w2.w.minCoeff() >= 0.0);
}
