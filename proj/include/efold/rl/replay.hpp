#pragma once

#include <Eigen/Dense>
#include <random>
#include <vector>

#include "efold/core.hpp"
#include "efold/reward.hpp"

namespace efold::rl {

/// Minibatch, one transition per column.
struct Batch {
    Eigen::MatrixXd obs;
    Eigen::MatrixXd actions;
    Eigen::VectorXd rewards;
    Eigen::MatrixXd next_obs;
    Eigen::VectorXd done;  // 1.0 for terminal (dropped) transitions
};

/// FIFO ring of transitions with uniform sampling.
class ReplayBuffer {
public:
    ReplayBuffer(std::size_t capacity, std::size_t obs_size, std::size_t action_size);

    void push(const Transition& t);
    void push(const std::vector<Transition>& ts);

    std::size_t size() const { return size_; }
    std::size_t capacity() const { return capacity_; }
    std::size_t total_pushed() const { return pushed_; }

    /// Uniform i.i.d. sampling with replacement. Throws UsageError when empty.
    Batch sample(std::size_t batch_size, std::mt19937_64& rng) const;

    /// Goal yaw stored with slot `i` (oldest first); for tests and diagnostics.
    double goal_at(std::size_t i) const;

private:
    std::size_t slot(std::size_t i) const { return (head_ + capacity_ - size_ + i) % capacity_; }

    std::size_t capacity_;
    std::size_t obs_size_;
    std::size_t action_size_;
    std::size_t head_ = 0;
    std::size_t size_ = 0;
    std::size_t pushed_ = 0;
    std::vector<double> obs_;
    std::vector<double> next_obs_;
    std::vector<double> actions_;
    std::vector<double> rewards_;
    std::vector<double> done_;
    std::vector<double> goals_;
};

/// Hindsight relabeling with the "future" strategy: the original transitions
/// followed by, for every step t, `k` copies whose goal is the achieved goal
/// of a uniformly drawn step in [t, T). Rewards are recomputed.
std::vector<Transition> her_relabel(const std::vector<Transition>& episode, int k, const RewardConfig& reward,
                                    std::mt19937_64& rng);

/// Transition with its goal replaced (observations and reward updated).
Transition relabel(const Transition& t, const Goal& goal, const RewardConfig& reward);

}  // namespace efold::rl
