#include "efold/rollout.hpp"

#include "efold/errors.hpp"

namespace efold {

ControlLoop::ControlLoop(const PlantConfig& plant, const RewardConfig& reward, Policy& policy, SensorModel sensor,
                         std::uint64_t sensor_seed, Angle initial_yaw)
    : plant_(plant),
      reward_(reward),
      policy_(&policy),
      sensor_(sensor),
      sensor_rng_(sensor_seed),
      state_(plant_.rest_state(initial_yaw)) {
    log_.dt = plant.dt;
    log_.fingers = static_cast<std::size_t>(plant.fingers);
    policy_->reset();
}

const StepRecord& ControlLoop::tick(const Goal& raw_goal) {
    if (state_.dropped) throw UsageError("control loop: object dropped, no further steps");
    const Goal sensed = sensor_.apply(raw_goal, sensor_rng_, plant_.config().dt);
    const Observation obs = build_observation(state_, sensed);
    Action action = clamp_action(policy_->act(obs));
    StepResult result = plant_.step(state_, action);
    state_ = std::move(result.state);

    StepRecord rec;
    rec.step = step_++;
    rec.phi = state_.phi.value();
    rec.goal = raw_goal.yaw.value();
    rec.goal_sensed = sensed.yaw.value();
    rec.reward = compute_reward(reward_, Goal(state_.phi), raw_goal, state_.dropped);
    rec.dropped = state_.dropped;
    rec.action = std::move(action);
    log_.append(std::move(rec));
    return log_.steps.back();
}

EpisodeLog run_episode(const PlantConfig& plant, const RewardConfig& reward, Policy& policy,
                       const std::function<Goal(int)>& goal_at, int steps, Angle initial_yaw, SensorModel sensor,
                       std::uint64_t sensor_seed) {
    ControlLoop loop(plant, reward, policy, sensor, sensor_seed, initial_yaw);
    for (int i = 0; i < steps && !loop.dropped(); ++i) loop.tick(goal_at(i));
    return loop.take_log();
}

double evaluate_success_rate(Policy& policy, const PlantConfig& plant_config, const RewardConfig& reward, int trials,
                             std::uint64_t seed) {
    if (trials <= 0) throw UsageError("evaluate_success_rate: trials must be positive");
    const Plant plant(plant_config);
    std::mt19937_64 rng(seed);
    int successes = 0;
    for (int trial = 0; trial < trials; ++trial) {
        PlantState state = plant.reset(rng);
        const Goal goal = random_goal(rng);
        policy.reset();
        for (int t = 0; t < plant_config.horizon && !state.dropped; ++t) {
            const Action a = policy.act(build_observation(state, goal));
            state = plant.step(state, a).state;
        }
        successes += is_success(state, goal, reward.tolerance) ? 1 : 0;
    }
    return static_cast<double>(successes) / trials;
}

}  // namespace efold
