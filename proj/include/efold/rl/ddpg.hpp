#pragma once

#include <cstdint>
#include <random>
#include <span>

#include "efold/core.hpp"
#include "efold/policy.hpp"
#include "efold/rl/mlp.hpp"
#include "efold/rl/normalizer.hpp"
#include "efold/rl/replay.hpp"

namespace efold::rl {

struct TrainConfig {
    int epochs = 200;
    int cycles_per_epoch = 50;
    int episodes_per_cycle = 2;
    int updates_per_cycle = 40;
    int batch_size = 256;
    double gamma = 0.98;
    double polyak = 0.95;
    double actor_lr = 1e-3;
    double critic_lr = 1e-3;
    double noise_sigma = 0.2;
    double random_action_prob = 0.3;
    int her_k = 4;
    std::size_t buffer_capacity = 1'000'000;
    int hidden_width = 256;
    double normalizer_clip = 5.0;
    double action_l2 = 1.0;
    int eval_trials = 50;

    void validate() const;
    /// Critic targets are clipped to [target_floor(), 0].
    double target_floor() const { return -1.0 / (1.0 - gamma); }
    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct UpdateStats {
    double critic_loss = 0.0;
    double actor_loss = 0.0;
};

/// Actor-critic pair with target copies and a shared observation normalizer.
/// Both networks have 5 layers: input, three rectifier layers, output.
class DdpgAgent {
public:
    DdpgAgent(std::size_t obs_size, std::size_t action_size, const TrainConfig& config, std::uint64_t seed);

    Action act(std::span<const double> obs) const;
    Action explore(std::span<const double> obs, std::mt19937_64& rng) const;

    /// One critic step and one actor step on `batch`. The normalizer absorbs
    /// the batch observations first.
    UpdateStats update(const Batch& batch);
    void update_targets();

    /// Clipped bootstrap targets r + gamma * Q'(s', mu'(s')).
    Eigen::VectorXd critic_targets(const Batch& batch) const;
    /// Mean squared Bellman error on a batch without changing anything.
    double critic_loss(const Batch& batch) const;

    const TrainConfig& config() const { return config_; }
    /// Lower clip for critic targets; defaults to config().target_floor().
    double target_floor() const { return floor_; }
    void set_target_floor(double floor);

    Mlp actor;
    Mlp critic;
    Mlp actor_target;
    Mlp critic_target;
    Adam actor_optimizer;
    Adam critic_optimizer;
    Normalizer normalizer;

private:
    Eigen::MatrixXd critic_input(const Eigen::MatrixXd& norm_obs, const Eigen::MatrixXd& actions) const;

    TrainConfig config_;
    std::size_t obs_size_;
    std::size_t action_size_;
    double floor_;
};

/// Deterministic actor behind a snapshot of the normalizer.
class ActorPolicy final : public Policy {
public:
    ActorPolicy(Mlp actor, Normalizer normalizer);
    Action act(std::span<const double> obs) override;

private:
    Mlp actor_;
    Normalizer normalizer_;
};

}  // namespace efold::rl
