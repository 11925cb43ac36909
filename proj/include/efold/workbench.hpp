#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "efold/goals.hpp"
#include "efold/metrics.hpp"
#include "efold/rl/checkpoint.hpp"

namespace efold {

/// splitmix64 of (seed, index): seeds for repeats and training runs.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

struct ScriptedEval {
    GoalSource goal = GoalSource::sinusoid(0.5, 0.05);
    int steps = 400;
    int repeats = 1;
    SensorModel sensor;
    std::uint64_t seed = 0;  // repeat r uses derive_seed(seed, r) for the sensor
};

/// Noise-free episodes of the checkpoint's actor against a scripted goal,
/// starting at rest with yaw 0. One log per repeat; a drop ends that log.
std::vector<EpisodeLog> run_scripted(const rl::PolicyCheckpoint& checkpoint, const ScriptedEval& eval);

/// The sinusoid or step table row for a batch of logs.
metrics::SineReport sine_row(const std::vector<EpisodeLog>& logs, const std::string& reward, double alpha,
                             double omega);
metrics::StepRow step_row(const std::vector<EpisodeLog>& logs, const std::string& reward,
                          const StepGoalParams& params);

/// Headless replay of a goal sequence, one goal per tick, from rest at yaw 0.
/// Same computation as a lockstep teleop session with the same seed.
EpisodeLog replay_goals(const rl::PolicyCheckpoint& checkpoint, const std::vector<double>& goals,
                        const SensorModel& sensor, std::uint64_t seed);

/// Header fields describing a scripted run, for trajectory files.
std::map<std::string, std::string> scripted_header(const ScriptedEval& eval, const std::string& reward, int repeat);

}  // namespace efold
