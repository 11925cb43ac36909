#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "efold/core.hpp"

namespace efold {

// Finger-gaiting rotation plant: K fingertips grip the rim of a disk and turn
// it through regularized Coulomb friction. Fingers must release and
// reposition to rotate further than their travel allows.
struct PlantConfig {
    int fingers = 5;
    double travel = 0.6;          // L, rim-arc units
    double v_max = 1.0;           // units/s
    double engage_rate = 2.0;     // 1/s
    double contact_threshold = 0.1;
    double friction = 1.0;        // mu
    double max_normal_force = 2.0;
    double slip_velocity = 0.1;   // units/s
    double radius = 1.0;
    double inertia = 1.0;
    double damping = 0.5;
    double drop_engagement = 0.5;
    int drop_steps = 5;
    double dt = kDefaultDt;
    int horizon = 100;
    double initial_engagement = 0.8;

    /// Throws ConfigError on any out-of-range field.
    void validate() const;
    friend bool operator==(const PlantConfig&, const PlantConfig&) = default;
};

struct PlantState {
    Angle phi;
    double phidot = 0.0;
    std::vector<double> s;   // tangential finger positions, [-L, L]
    std::vector<double> n;   // engagements, [0, 1]
    std::vector<double> sdot;
    std::vector<double> ndot;
    int under_grip_steps = 0;
    bool dropped = false;

    friend bool operator==(const PlantState&, const PlantState&) = default;
};

struct YawRange {
    double lo = -kPi;
    double hi = kPi;
};

struct StepResult {
    PlantState state;
    bool dropped = false;
};

class Plant {
public:
    explicit Plant(PlantConfig config);

    const PlantConfig& config() const { return config_; }

    PlantState reset(std::uint64_t seed, YawRange range = {}) const;
    PlantState reset(std::mt19937_64& rng, YawRange range = {}) const;
    /// State at a given yaw with fingers centered and engaged.
    PlantState rest_state(Angle yaw) const;

    /// One semi-implicit Euler step. Actions are clamped to [-1, 1].
    /// Throws UsageError if `state` is already dropped.
    StepResult step(const PlantState& state, std::span<const double> action) const;

    /// Contact force of a single finger given its post-update engagement.
    double contact_force(double engagement, double finger_velocity, double phidot) const;

private:
    PlantConfig config_;
};

/// angular_distance(phi, goal) < tolerance and the object is still held.
bool is_success(const PlantState& state, const Goal& goal, double tolerance);

/// Observation layout shared by training, evaluation and teleop.
Observation build_observation(const PlantState& state, const Goal& goal);
/// Overwrites the 7 goal slots of an existing observation.
void set_observation_goal(std::span<double> obs, const Goal& goal);
/// Object yaw carried in the object-quaternion slots.
Angle observation_yaw(std::span<const double> obs);

}  // namespace efold
