#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <random>

#include "efold/core.hpp"
#include "efold/goals.hpp"
#include "efold/plant.hpp"
#include "efold/policy.hpp"
#include "efold/reward.hpp"

namespace efold {

/// One plant + policy + goal-sensor loop. Every path that drives a policy
/// against a goal stream (scripted evaluation, headless replay, live teleop)
/// goes through tick(), so their trajectories agree bit for bit.
class ControlLoop {
public:
    ControlLoop(const PlantConfig& plant, const RewardConfig& reward, Policy& policy, SensorModel sensor,
                std::uint64_t sensor_seed, Angle initial_yaw);

    /// Apply the sensor to `raw_goal`, act, step the plant once and log it.
    /// Throws UsageError once the object has been dropped.
    const StepRecord& tick(const Goal& raw_goal);

    const PlantState& state() const { return state_; }
    const EpisodeLog& log() const { return log_; }
    EpisodeLog take_log() { return std::move(log_); }
    int steps() const { return step_; }
    bool dropped() const { return state_.dropped; }
    const Plant& plant() const { return plant_; }

private:
    Plant plant_;
    RewardConfig reward_;
    Policy* policy_;
    Sensor sensor_;
    std::mt19937_64 sensor_rng_;
    PlantState state_;
    EpisodeLog log_;
    int step_ = 0;
};

/// Runs up to `steps` ticks against `goal_at(i)`, stopping early on a drop.
EpisodeLog run_episode(const PlantConfig& plant, const RewardConfig& reward, Policy& policy,
                       const std::function<Goal(int)>& goal_at, int steps, Angle initial_yaw = Angle(0.0),
                       SensorModel sensor = {}, std::uint64_t sensor_seed = 0);

/// Fraction of `trials` noise-free episodes (random initial yaw, random goal,
/// one horizon each) that end within the reward tolerance without a drop.
double evaluate_success_rate(Policy& policy, const PlantConfig& plant, const RewardConfig& reward, int trials,
                             std::uint64_t seed);

}  // namespace efold
