#include "efold/goals.hpp"

#include <cmath>

#include "efold/errors.hpp"

namespace efold {

Goal random_goal(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-kPi, kPi);
    double yaw = dist(rng);
    while (yaw <= -kPi) yaw = dist(rng);  // open interval
    return Goal(wrap_angle(yaw));
}

Goal sinusoid_goal(double alpha, double omega, int step) {
    if (step < 0) throw UsageError("sinusoid_goal: negative step index");
    return Goal::from_radians(alpha * std::sin(omega * step));
}

Goal step_goal(int step, StepGoalParams params) {
    if (step < 0) throw UsageError("step_goal: negative step index");
    return Goal::from_radians(step < params.onset ? 0.0 : params.magnitude);
}

GoalSource GoalSource::sinusoid(double alpha, double omega) {
    GoalSource g;
    g.kind = Kind::sinusoid;
    g.alpha = alpha;
    g.omega = omega;
    g.validate();
    return g;
}

GoalSource GoalSource::step(double magnitude, int onset) {
    GoalSource g;
    g.kind = Kind::step;
    g.step_params = {magnitude, onset};
    g.validate();
    return g;
}

void GoalSource::validate() const {
    if (kind == Kind::sinusoid && !(alpha > 0 && omega > 0)) {
        throw ConfigError("sinusoid goal requires alpha > 0 and omega > 0");
    }
    if (kind == Kind::step && step_params.onset < 0) {
        throw ConfigError("step goal onset must be non-negative");
    }
}

Goal GoalSource::at(int step) const {
    switch (kind) {
        case Kind::sinusoid: return sinusoid_goal(alpha, omega, step);
        case Kind::step: return step_goal(step, step_params);
        default: throw UsageError("goal source is not a scripted trajectory");
    }
}

std::string_view to_string(SensorKind kind) {
    switch (kind) {
        case SensorKind::imu: return "imu";
        case SensorKind::camera: return "camera";
        default: return "ideal";
    }
}

SensorKind sensor_kind_from_string(std::string_view name) {
    if (name == "ideal") return SensorKind::ideal;
    if (name == "imu") return SensorKind::imu;
    if (name == "camera") return SensorKind::camera;
    throw ConfigError("unknown sensor '" + std::string(name) + "' (expected ideal|imu|camera)");
}

void SensorModel::validate() const {
    if (imu_bias_walk < 0 || imu_noise < 0 || camera_noise < 0 || camera_quantum < 0) {
        throw ConfigError("sensor noise parameters must be non-negative");
    }
    if (!(camera_dropout >= 0 && camera_dropout < 1)) {
        throw ConfigError("camera dropout probability must be in [0, 1)");
    }
}

Sensor::Sensor(SensorModel model) : model_(model) { model_.validate(); }

void Sensor::reset() {
    bias_ = 0.0;
    last_output_.reset();
}

Goal Sensor::apply(const Goal& truth, std::mt19937_64& rng, double dt) {
    if (!(dt > 0)) throw UsageError("sensor dt must be positive");
    std::normal_distribution<double> unit(0.0, 1.0);
    switch (model_.kind) {
        case SensorKind::ideal:
            return truth;
        case SensorKind::imu: {
            bias_ += model_.imu_bias_walk * std::sqrt(dt) * unit(rng);
            const double noise = model_.imu_noise * unit(rng);
            return Goal::from_radians(truth.yaw.value() + bias_ + noise);
        }
        case SensorKind::camera: {
            // Draw both variates every frame so the stream stays aligned.
            const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
            const double noise = model_.camera_noise * unit(rng);
            if (last_output_ && u < model_.camera_dropout) return *last_output_;
            double measured = truth.yaw.value() + noise;
            if (model_.camera_quantum > 0) {
                measured = std::round(measured / model_.camera_quantum) * model_.camera_quantum;
            }
            last_output_ = Goal::from_radians(measured);
            return *last_output_;
        }
    }
    return truth;
}

Goal stream_goal(const std::optional<Goal>& latest_received, const Goal& previous) {
    return latest_received ? *latest_received : previous;
}

void GoalLatch::put(const Goal& goal) {
    std::lock_guard lock(mutex_);
    pending_ = goal;
    ++writes_;
}

std::optional<Goal> GoalLatch::take() {
    std::lock_guard lock(mutex_);
    std::optional<Goal> out;
    out.swap(pending_);
    return out;
}

}  // namespace efold
