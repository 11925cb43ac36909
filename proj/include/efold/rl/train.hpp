#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "efold/rl/checkpoint.hpp"

namespace efold::rl {

struct EpochRecord {
    int epoch = 0;
    double success_rate = 0.0;
    double critic_loss = 0.0;
    double actor_loss = 0.0;
    double seconds = 0.0;
};

struct TrainResult {
    PolicyCheckpoint checkpoint;
    std::vector<EpochRecord> log;
};

/// Goal-conditioned DDPG with hindsight relabeling. Each epoch runs
/// `cycles_per_epoch` cycles of exploratory rollouts (random initial yaw,
/// one random goal per episode), HER storage, gradient updates and a target
/// soft update, then scores the deterministic policy on a fixed validation
/// set of `eval_trials` episodes. Fully deterministic for a given seed.
/// Throws RuntimeFault if any parameter becomes non-finite.
TrainResult train(const PlantConfig& plant, const RewardConfig& reward, const TrainConfig& config, std::uint64_t seed,
                  const std::function<void(const EpochRecord&)>& on_epoch = {});

/// Seed used for the validation episodes of a training run.
std::uint64_t validation_seed(std::uint64_t seed);

/// Success rate of a checkpoint's deterministic actor on `trials` episodes.
double evaluate_success_rate(const PolicyCheckpoint& checkpoint, int trials, std::uint64_t seed);

}  // namespace efold::rl
