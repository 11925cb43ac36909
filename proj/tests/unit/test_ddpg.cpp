#include <doctest.h>

#include <random>

#include "efold/errors.hpp"
#include "efold/rl/ddpg.hpp"

using namespace efold;
using namespace efold::rl;

namespace {

constexpr std::size_t kObs = 6;
constexpr std::size_t kAct = 2;

TrainConfig small_config() {
    TrainConfig c;
    c.hidden_width = 16;
    c.action_l2 = 0.0;
    return c;
}

Batch random_batch(Eigen::Index n, std::mt19937_64& rng, double done_prob = 0.0) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::bernoulli_distribution done(done_prob);
    Batch b{Eigen::MatrixXd(kObs, n), Eigen::MatrixXd(kAct, n), Eigen::VectorXd(n), Eigen::MatrixXd(kObs, n),
            Eigen::VectorXd(n)};
    for (Eigen::Index c = 0; c < n; ++c) {
        for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(kObs); ++i) {
            b.obs(i, c) = g(rng);
            b.next_obs(i, c) = g(rng);
        }
        for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(kAct); ++i) b.actions(i, c) = u(rng);
        b.rewards(c) = -std::abs(g(rng));
        b.done(c) = done(rng) ? 1.0 : 0.0;
    }
    return b;
}

}  // namespace

TEST_CASE("gamma zero: targets are the rewards") {
    auto cfg = small_config();
    cfg.gamma = 0.0;
    // A zero floor is not allowed, but gamma = 0 gives floor -1; keep rewards above it.
    DdpgAgent agent(kObs, kAct, cfg, 3);
    std::mt19937_64 rng(1);
    Batch b = random_batch(32, rng, 0.3);
    b.rewards = b.rewards.cwiseMax(-0.99);
    CHECK((agent.critic_targets(b) - b.rewards).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("targets are clipped to [floor, 0]") {
    auto cfg = small_config();
    DdpgAgent agent(kObs, kAct, cfg, 4);
    CHECK(agent.target_floor() == doctest::Approx(-1.0 / (1.0 - cfg.gamma)));
    std::mt19937_64 rng(2);
    Batch b = random_batch(64, rng, 0.5);
    b.rewards.head(8).setConstant(5.0);
    b.rewards.segment(8, 8).setConstant(-1e3);
    const Eigen::VectorXd y = agent.critic_targets(b);
    CHECK(y.maxCoeff() <= 0.0);
    CHECK(y.minCoeff() >= agent.target_floor());
    CHECK(y.head(8).maxCoeff() == 0.0);
    CHECK(y.segment(8, 8).minCoeff() == agent.target_floor());

    agent.set_target_floor(-3.0);
    CHECK(agent.critic_targets(b).minCoeff() == -3.0);
    CHECK_THROWS_AS(agent.set_target_floor(0.0), UsageError);
    CHECK_THROWS_AS(agent.set_target_floor(std::nan("")), UsageError);
}

TEST_CASE("dropped transitions bootstrap from the floor") {
    auto cfg = small_config();
    DdpgAgent agent(kObs, kAct, cfg, 5);
    std::mt19937_64 rng(3);
    Batch b = random_batch(4, rng);
    b.done.setOnes();
    b.rewards.setConstant(-1.0);
    const Eigen::VectorXd y = agent.critic_targets(b);
    for (Eigen::Index i = 0; i < y.size(); ++i)
        CHECK(y(i) == doctest::Approx(std::max(-1.0 + cfg.gamma * agent.target_floor(), agent.target_floor())));
}

TEST_CASE("polyak 1 leaves the targets untouched, 0 copies") {
    auto cfg = small_config();
    cfg.polyak = 1.0;
    DdpgAgent agent(kObs, kAct, cfg, 6);
    std::mt19937_64 rng(4);
    const Mlp actor_before = agent.actor_target;
    const Mlp critic_before = agent.critic_target;
    agent.update(random_batch(32, rng));
    agent.update_targets();
    CHECK(agent.actor_target == actor_before);
    CHECK(agent.critic_target == critic_before);
    CHECK_FALSE(agent.actor == actor_before);

    cfg.polyak = 0.0;
    DdpgAgent copy(kObs, kAct, cfg, 6);
    copy.update(random_batch(32, rng));
    copy.update_targets();
    CHECK(copy.actor_target == copy.actor);
    CHECK(copy.critic_target == copy.critic);
}

TEST_CASE("updates on a fixed batch reduce the critic loss") {
    auto cfg = small_config();
    cfg.polyak = 1.0;  // frozen targets: a plain regression problem
    DdpgAgent agent(kObs, kAct, cfg, 7);
    std::mt19937_64 rng(5);
    const Batch b = random_batch(64, rng);
    agent.update(b);
    const double before = agent.critic_loss(b);
    for (int i = 0; i < 200; ++i) agent.update(b);
    const double after = agent.critic_loss(b);
    CHECK(after < 0.5 * before);
}

TEST_CASE("agent is deterministic per seed and acts within bounds") {
    const auto cfg = small_config();
    DdpgAgent a(kObs, kAct, cfg, 11), b(kObs, kAct, cfg, 11), c(kObs, kAct, cfg, 12);
    CHECK(a.actor == b.actor);
    CHECK_FALSE(a.actor == c.actor);
    std::mt19937_64 rng(6);
    const std::vector<double> obs(kObs, 0.7);
    for (int i = 0; i < 100; ++i) {
        for (double v : a.explore(obs, rng)) {
            CHECK(v >= -1.0);
            CHECK(v <= 1.0);
        }
    }
    CHECK_THROWS_AS(a.act(std::vector<double>(kObs + 1, 0.0)), UsageError);
    CHECK_THROWS_AS(a.update(Batch{}), UsageError);
}

TEST_CASE("bad training config is rejected") {
    TrainConfig c;
    c.gamma = 1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.polyak = 1.5;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.hidden_width = 0;
    CHECK_THROWS_AS(DdpgAgent(kObs, kAct, c, 0), ConfigError);
}

TEST_CASE("actor policy mirrors the agent") {
    DdpgAgent agent(kObs, kAct, small_config(), 9);
    std::mt19937_64 rng(7);
    agent.update(random_batch(16, rng));
    ActorPolicy policy(agent.actor, agent.normalizer);
    const std::vector<double> obs{0.1, -0.2, 0.3, 0.4, -0.5, 0.6};
    CHECK(policy.act(obs) == agent.act(obs));
}
