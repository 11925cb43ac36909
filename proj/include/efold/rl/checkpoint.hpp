#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>

#include "efold/plant.hpp"
#include "efold/policy.hpp"
#include "efold/reward.hpp"
#include "efold/rl/ddpg.hpp"

namespace efold::rl {

struct PolicyCheckpoint {
    static constexpr int kFormatVersion = 1;

    PlantConfig plant;
    RewardConfig reward;
    TrainConfig training;
    std::uint64_t seed = 0;
    int run_index = 0;
    int epochs_completed = 0;

    Mlp actor;
    Mlp critic;
    Mlp actor_target;
    Mlp critic_target;
    Normalizer normalizer;

    static PolicyCheckpoint from_agent(const DdpgAgent& agent, const PlantConfig& plant, const RewardConfig& reward,
                                       std::uint64_t seed, int run_index, int epochs_completed);

    /// Noise-free actor policy for evaluation and serving.
    std::unique_ptr<Policy> policy() const;

    friend bool operator==(const PolicyCheckpoint&, const PolicyCheckpoint&) = default;
};

/// Writes a single JSON document: format tag and version, the three config
/// sections, layer sizes, normalizer statistics and every parameter array.
/// Doubles are printed with round-trip precision, so load(save(x)) == x.
void save_checkpoint(const PolicyCheckpoint& checkpoint, const std::filesystem::path& path);

/// Throws LoadError on a missing, truncated or corrupt file, on a version
/// mismatch, or when stored shapes disagree with the stored configs.
PolicyCheckpoint load_checkpoint(const std::filesystem::path& path);

/// Throws ConfigError when the checkpoint was trained for a different plant
/// dimension than `plant`.
void require_compatible(const PolicyCheckpoint& checkpoint, const PlantConfig& plant);

}  // namespace efold::rl
