#pragma once

#include <atomic>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <string_view>

#include "efold/core.hpp"

namespace efold {

Goal random_goal(std::mt19937_64& rng);

/// yaw = alpha * sin(omega * step); omega in rad/step.
Goal sinusoid_goal(double alpha, double omega, int step);

struct StepGoalParams {
    double magnitude = 1.0;
    int onset = 50;
};

Goal step_goal(int step, StepGoalParams params = {});

/// Scripted or random goal trajectory.
struct GoalSource {
    enum class Kind { random_episode, sinusoid, step, stream };

    Kind kind = Kind::random_episode;
    double alpha = 0.5;
    double omega = 0.05;
    StepGoalParams step_params;

    static GoalSource sinusoid(double alpha, double omega);
    static GoalSource step(double magnitude = 1.0, int onset = 50);

    void validate() const;
    /// Goal at `step` for the scripted variants. Throws UsageError for
    /// random_episode / stream, which are not functions of the step index.
    Goal at(int step) const;
};

enum class SensorKind { ideal, imu, camera };

std::string_view to_string(SensorKind kind);
SensorKind sensor_kind_from_string(std::string_view name);

struct SensorModel {
    SensorKind kind = SensorKind::ideal;
    double imu_bias_walk = 0.02;   // sigma_b, rad/sqrt(s)
    double imu_noise = 0.005;      // sigma_n, rad
    double camera_noise = 0.02;    // sigma_c, rad
    double camera_dropout = 0.02;  // p_d
    double camera_quantum = 0.005; // q, rad

    void validate() const;
    friend bool operator==(const SensorModel&, const SensorModel&) = default;
};

/// Stateful simulation of a goal-extraction sensor (bias random walk for the
/// internal sensor, held frames for the external one).
class Sensor {
public:
    explicit Sensor(SensorModel model = {});

    const SensorModel& model() const { return model_; }
    double bias() const { return bias_; }

    Goal apply(const Goal& truth, std::mt19937_64& rng, double dt);
    void reset();

private:
    SensorModel model_;
    double bias_ = 0.0;
    std::optional<Goal> last_output_;
};

/// Zero-order hold: the latest received goal if one arrived, else `previous`.
Goal stream_goal(const std::optional<Goal>& latest_received, const Goal& previous);

/// Single-writer / single-reader goal latch between the network receive path
/// and the control loop. `take` returns the newest value written since the
/// previous `take`, if any.
class GoalLatch {
public:
    void put(const Goal& goal);
    std::optional<Goal> take();
    std::uint64_t writes() const { return writes_.load(); }

private:
    mutable std::mutex mutex_;
    std::optional<Goal> pending_;
    std::atomic<std::uint64_t> writes_{0};
};

}  // namespace efold
