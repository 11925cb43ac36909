#pragma once

#include <cstdint>

#include "efold/plant.hpp"
#include "efold/rl/checkpoint.hpp"

namespace efold::testing {

/// Untrained but valid checkpoint with small networks.
inline rl::PolicyCheckpoint small_checkpoint(std::uint64_t seed, RewardKind reward = RewardKind::dense) {
    PlantConfig plant;
    rl::TrainConfig train;
    train.hidden_width = 16;
    const rl::DdpgAgent agent(observation_size(plant.fingers), action_size(plant.fingers), train, seed);
    return rl::PolicyCheckpoint::from_agent(agent, plant, RewardConfig::for_kind(reward), seed, 0, 0);
}

/// Checkpoint whose actor always opens every finger, so the object drops.
inline rl::PolicyCheckpoint releasing_checkpoint(std::uint64_t seed) {
    auto c = small_checkpoint(seed);
    const std::size_t last = c.actor.layer_count() - 2;
    c.actor.weight(last).setZero();
    for (int i = 0; i < c.plant.fingers; ++i) {
        c.actor.bias(last)(2 * i) = 0.0;
        c.actor.bias(last)(2 * i + 1) = -10.0;
    }
    return c;
}

}  // namespace efold::testing
