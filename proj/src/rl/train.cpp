#include "efold/rl/train.hpp"

#include <chrono>
#include <string>

#include "efold/errors.hpp"
#include "efold/goals.hpp"
#include "efold/reward.hpp"
#include "efold/rollout.hpp"

namespace efold::rl {

namespace {

// splitmix64 finalizer; derives independent stream seeds from one run seed.
std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::vector<Transition> collect_episode(const Plant& plant, const RewardConfig& reward, const DdpgAgent& agent,
                                        std::mt19937_64& rng) {
    const PlantConfig& cfg = plant.config();
    PlantState state = plant.reset(rng);
    const Goal goal = random_goal(rng);
    std::vector<Transition> episode;
    episode.reserve(static_cast<std::size_t>(cfg.horizon));
    Observation obs = build_observation(state, goal);
    for (int t = 0; t < cfg.horizon; ++t) {
        Action action = agent.explore(obs, rng);
        StepResult next = plant.step(state, action);
        Transition tr;
        tr.achieved_goal = Goal(next.state.phi);
        tr.goal = goal;
        tr.done = next.dropped;
        tr.reward = compute_reward(reward, tr.achieved_goal, goal, next.dropped);
        tr.next_obs = build_observation(next.state, goal);
        tr.obs = std::move(obs);
        tr.action = std::move(action);
        obs = tr.next_obs;
        episode.push_back(std::move(tr));
        state = std::move(next.state);
        if (state.dropped) break;
    }
    return episode;
}

}  // namespace

std::uint64_t validation_seed(std::uint64_t seed) { return mix(seed ^ 0x5eedULL); }

TrainResult train(const PlantConfig& plant_config, const RewardConfig& reward, const TrainConfig& config,
                  std::uint64_t seed, const std::function<void(const EpochRecord&)>& on_epoch) {
    plant_config.validate();
    reward.validate();
    config.validate();
    const Plant plant(plant_config);
    const auto k = static_cast<std::size_t>(plant_config.fingers);
    DdpgAgent agent(observation_size(k), action_size(k), config, mix(seed));
    // Scale the clip with the worst per-step reward so dense returns are not
    // flattened onto the floor (for sparse this is exactly -1/(1-gamma)).
    agent.set_target_floor(min_step_reward(reward) / (1.0 - config.gamma));
    ReplayBuffer buffer(config.buffer_capacity, observation_size(k), action_size(k));
    std::mt19937_64 rollout_rng(mix(seed + 1));
    std::mt19937_64 her_rng(mix(seed + 2));
    std::mt19937_64 sample_rng(mix(seed + 3));

    TrainResult result;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        EpochRecord rec;
        rec.epoch = epoch;
        int updates = 0;
        for (int cycle = 0; cycle < config.cycles_per_epoch; ++cycle) {
            for (int e = 0; e < config.episodes_per_cycle; ++e) {
                const auto episode = collect_episode(plant, reward, agent, rollout_rng);
                buffer.push(her_relabel(episode, config.her_k, reward, her_rng));
            }
            for (int u = 0; u < config.updates_per_cycle; ++u) {
                const UpdateStats s = agent.update(buffer.sample(static_cast<std::size_t>(config.batch_size), sample_rng));
                rec.critic_loss += s.critic_loss;
                rec.actor_loss += s.actor_loss;
                ++updates;
            }
            agent.update_targets();
        }
        if (!agent.actor.all_finite() || !agent.critic.all_finite()) {
            throw RuntimeFault("training diverged: non-finite network parameters in epoch " + std::to_string(epoch));
        }
        rec.critic_loss /= updates;
        rec.actor_loss /= updates;
        ActorPolicy policy(agent.actor, agent.normalizer);
        rec.success_rate = efold::evaluate_success_rate(policy, plant_config, reward, config.eval_trials,
                                                        validation_seed(seed));
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        result.log.push_back(rec);
        if (on_epoch) on_epoch(rec);
    }
    result.checkpoint = PolicyCheckpoint::from_agent(agent, plant_config, reward, seed, 0, config.epochs);
    return result;
}

double evaluate_success_rate(const PolicyCheckpoint& checkpoint, int trials, std::uint64_t seed) {
    auto policy = checkpoint.policy();
    return efold::evaluate_success_rate(*policy, checkpoint.plant, checkpoint.reward, trials, seed);
}

PolicyCheckpoint PolicyCheckpoint::from_agent(const DdpgAgent& agent, const PlantConfig& plant,
                                              const RewardConfig& reward, std::uint64_t seed, int run_index,
                                              int epochs_completed) {
    PolicyCheckpoint c;
    c.plant = plant;
    c.reward = reward;
    c.training = agent.config();
    c.seed = seed;
    c.run_index = run_index;
    c.epochs_completed = epochs_completed;
    c.actor = agent.actor;
    c.critic = agent.critic;
    c.actor_target = agent.actor_target;
    c.critic_target = agent.critic_target;
    c.normalizer = agent.normalizer;
    for (Mlp* m : {&c.actor, &c.critic, &c.actor_target, &c.critic_target}) m->clear_cache();
    return c;
}

std::unique_ptr<Policy> PolicyCheckpoint::policy() const { return std::make_unique<ActorPolicy>(actor, normalizer); }

}  // namespace efold::rl
