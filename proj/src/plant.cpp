#include "efold/plant.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "efold/errors.hpp"

namespace efold {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("plant config: ") + what);
}

}  // namespace

void PlantConfig::validate() const {
    require(fingers > 0, "fingers must be positive");
    require(travel > 0, "travel must be positive");
    require(v_max > 0, "v_max must be positive");
    require(engage_rate > 0, "engage_rate must be positive");
    require(contact_threshold > 0 && contact_threshold < 1, "contact_threshold must be in (0, 1)");
    require(friction > 0, "friction must be positive");
    require(max_normal_force > 0, "max_normal_force must be positive");
    require(slip_velocity > 0, "slip_velocity must be positive");
    require(radius > 0, "radius must be positive");
    require(inertia > 0, "inertia must be positive");
    require(damping > 0, "damping must be positive");
    require(drop_engagement > 0, "drop_engagement must be positive");
    require(drop_steps > 0, "drop_steps must be positive");
    require(dt > 0, "dt must be positive");
    require(horizon > 0, "horizon must be positive");
    require(initial_engagement >= 0 && initial_engagement <= 1, "initial_engagement must be in [0, 1]");
}

Plant::Plant(PlantConfig config) : config_(config) { config_.validate(); }

PlantState Plant::rest_state(Angle yaw) const {
    const auto k = static_cast<std::size_t>(config_.fingers);
    PlantState st;
    st.phi = yaw;
    st.s.assign(k, 0.0);
    st.n.assign(k, config_.initial_engagement);
    st.sdot.assign(k, 0.0);
    st.ndot.assign(k, 0.0);
    return st;
}

PlantState Plant::reset(std::mt19937_64& rng, YawRange range) const {
    if (!(range.lo <= range.hi) || !std::isfinite(range.lo) || !std::isfinite(range.hi)) {
        throw ConfigError("reset: empty or invalid initial yaw range");
    }
    if (range.lo < -kPi || range.hi > kPi) {
        throw ConfigError("reset: initial yaw range must lie within [-pi, pi]");
    }
    double yaw = range.lo;
    if (range.hi > range.lo) {
        yaw = std::uniform_real_distribution<double>(range.lo, range.hi)(rng);
    }
    return rest_state(wrap_angle(yaw));
}

PlantState Plant::reset(std::uint64_t seed, YawRange range) const {
    std::mt19937_64 rng(seed);
    return reset(rng, range);
}

double Plant::contact_force(double engagement, double finger_velocity, double phidot) const {
    if (engagement < config_.contact_threshold) return 0.0;
    const double slip = (finger_velocity - config_.radius * phidot) / config_.slip_velocity;
    return config_.friction * engagement * config_.max_normal_force * std::clamp(slip, -1.0, 1.0);
}

StepResult Plant::step(const PlantState& state, std::span<const double> action) const {
    const auto k = static_cast<std::size_t>(config_.fingers);
    if (state.dropped) throw UsageError("plant step: object already dropped");
    if (action.size() != 2 * k) {
        throw UsageError("plant step: expected " + std::to_string(2 * k) + " action values, got " +
                         std::to_string(action.size()));
    }
    const Action a = clamp_action(action);
    const double dt = config_.dt;

    PlantState next = state;
    double torque = 0.0;
    double total_engagement = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double v_cmd = a[2 * i] * config_.v_max;
        const double n_new = std::clamp(state.n[i] + a[2 * i + 1] * config_.engage_rate * dt, 0.0, 1.0);
        const double s_new = std::clamp(state.s[i] + v_cmd * dt, -config_.travel, config_.travel);
        // A finger pinned at its travel limit cannot drag the rim along.
        const double v = (s_new - state.s[i]) / dt;
        torque += config_.radius * contact_force(n_new, v, state.phidot);
        total_engagement += n_new;

        next.sdot[i] = v;
        next.ndot[i] = (n_new - state.n[i]) / dt;
        next.s[i] = s_new;
        next.n[i] = n_new;
    }
    next.phidot = state.phidot + dt * (torque - config_.damping * state.phidot) / config_.inertia;
    next.phi = wrap_angle(state.phi.value() + dt * next.phidot);

    next.under_grip_steps = total_engagement < config_.drop_engagement ? state.under_grip_steps + 1 : 0;
    next.dropped = next.under_grip_steps >= config_.drop_steps;
    const bool dropped = next.dropped;
    return {std::move(next), dropped};
}

bool is_success(const PlantState& state, const Goal& goal, double tolerance) {
    return !state.dropped && angular_distance(state.phi, goal.yaw) < tolerance;
}

namespace {
constexpr std::size_t kObjectSlots = 13;
constexpr std::size_t kGoalSlots = 7;
}  // namespace

Observation build_observation(const PlantState& state, const Goal& goal) {
    const std::size_t k = state.s.size();
    Observation obs(observation_size(k), 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        obs[2 * i] = state.s[i];
        obs[2 * i + 1] = state.n[i];
        obs[2 * k + 2 * i] = state.sdot[i];
        obs[2 * k + 2 * i + 1] = state.ndot[i];
    }
    // Object block: position (3, fixed at the palm origin), quaternion (4),
    // linear velocity (3, zero), angular velocity (3, only Z live).
    const std::size_t obj = 4 * k;
    const YawQuaternion q = yaw_to_quaternion(state.phi);
    obs[obj + 3] = q.w;
    obs[obj + 4] = q.x;
    obs[obj + 5] = q.y;
    obs[obj + 6] = q.z;
    obs[obj + 12] = state.phidot;
    set_observation_goal(obs, goal);
    return obs;
}

void set_observation_goal(std::span<double> obs, const Goal& goal) {
    const std::size_t g = obs.size() - kGoalSlots;
    const std::size_t obj = g - kObjectSlots;
    // Goal position mirrors the object position.
    obs[g + 0] = obs[obj + 0];
    obs[g + 1] = obs[obj + 1];
    obs[g + 2] = obs[obj + 2];
    obs[g + 3] = goal.quat.w;
    obs[g + 4] = goal.quat.x;
    obs[g + 5] = goal.quat.y;
    obs[g + 6] = goal.quat.z;
}

Angle observation_yaw(std::span<const double> obs) {
    const std::size_t obj = obs.size() - kGoalSlots - kObjectSlots;
    return quaternion_to_yaw({obs[obj + 3], obs[obj + 4], obs[obj + 5], obs[obj + 6]});
}

}  // namespace efold
