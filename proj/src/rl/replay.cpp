#include "efold/rl/replay.hpp"

#include <algorithm>

#include "efold/errors.hpp"
#include "efold/plant.hpp"

namespace efold::rl {

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::size_t obs_size, std::size_t action_size)
    : capacity_(capacity), obs_size_(obs_size), action_size_(action_size) {
    if (capacity == 0) throw ConfigError("replay buffer capacity must be positive");
}

void ReplayBuffer::push(const Transition& t) {
    if (t.obs.size() != obs_size_ || t.next_obs.size() != obs_size_ || t.action.size() != action_size_) {
        throw UsageError("replay buffer: transition dimensions do not match the buffer");
    }
    // Storage grows lazily up to capacity.
    if (obs_.size() < capacity_ * obs_size_ && head_ * obs_size_ == obs_.size()) {
        obs_.insert(obs_.end(), t.obs.begin(), t.obs.end());
        next_obs_.insert(next_obs_.end(), t.next_obs.begin(), t.next_obs.end());
        actions_.insert(actions_.end(), t.action.begin(), t.action.end());
        rewards_.push_back(t.reward);
        done_.push_back(t.done ? 1.0 : 0.0);
        goals_.push_back(t.goal.yaw.value());
    } else {
        std::copy(t.obs.begin(), t.obs.end(), obs_.begin() + static_cast<std::ptrdiff_t>(head_ * obs_size_));
        std::copy(t.next_obs.begin(), t.next_obs.end(),
                  next_obs_.begin() + static_cast<std::ptrdiff_t>(head_ * obs_size_));
        std::copy(t.action.begin(), t.action.end(),
                  actions_.begin() + static_cast<std::ptrdiff_t>(head_ * action_size_));
        rewards_[head_] = t.reward;
        done_[head_] = t.done ? 1.0 : 0.0;
        goals_[head_] = t.goal.yaw.value();
    }
    head_ = (head_ + 1) % capacity_;
    size_ = std::min(size_ + 1, capacity_);
    ++pushed_;
}

void ReplayBuffer::push(const std::vector<Transition>& ts) {
    for (const auto& t : ts) push(t);
}

Batch ReplayBuffer::sample(std::size_t batch_size, std::mt19937_64& rng) const {
    if (size_ == 0) throw UsageError("replay buffer is empty");
    const auto b = static_cast<Eigen::Index>(batch_size);
    const auto os = static_cast<Eigen::Index>(obs_size_);
    const auto as = static_cast<Eigen::Index>(action_size_);
    Batch batch{Eigen::MatrixXd(os, b), Eigen::MatrixXd(as, b), Eigen::VectorXd(b), Eigen::MatrixXd(os, b),
                Eigen::VectorXd(b)};
    std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
    for (Eigen::Index c = 0; c < b; ++c) {
        const std::size_t i = slot(pick(rng));
        batch.obs.col(c) = Eigen::Map<const Eigen::VectorXd>(obs_.data() + i * obs_size_, os);
        batch.next_obs.col(c) = Eigen::Map<const Eigen::VectorXd>(next_obs_.data() + i * obs_size_, os);
        batch.actions.col(c) = Eigen::Map<const Eigen::VectorXd>(actions_.data() + i * action_size_, as);
        batch.rewards(c) = rewards_[i];
        batch.done(c) = done_[i];
    }
    return batch;
}

double ReplayBuffer::goal_at(std::size_t i) const {
    if (i >= size_) throw UsageError("replay buffer index out of range");
    return goals_[slot(i)];
}

Transition relabel(const Transition& t, const Goal& goal, const RewardConfig& reward) {
    Transition out = t;
    out.goal = goal;
    set_observation_goal(out.obs, goal);
    set_observation_goal(out.next_obs, goal);
    out.reward = compute_reward(reward, out.achieved_goal, goal, out.done);
    return out;
}

std::vector<Transition> her_relabel(const std::vector<Transition>& episode, int k, const RewardConfig& reward,
                                    std::mt19937_64& rng) {
    if (episode.empty()) throw UsageError("her_relabel: empty episode");
    if (k < 0) throw UsageError("her_relabel: k must be non-negative");
    std::vector<Transition> out(episode.begin(), episode.end());
    out.reserve(episode.size() * static_cast<std::size_t>(k + 1));
    const std::size_t n = episode.size();
    for (std::size_t t = 0; t < n; ++t) {
        std::uniform_int_distribution<std::size_t> future(t, n - 1);
        for (int j = 0; j < k; ++j) {
            out.push_back(relabel(episode[t], episode[future(rng)].achieved_goal, reward));
        }
    }
    return out;
}

}  // namespace efold::rl
