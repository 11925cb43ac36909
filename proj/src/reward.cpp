#include "efold/reward.hpp"

#include "efold/errors.hpp"

namespace efold {

std::string_view to_string(RewardKind kind) { return kind == RewardKind::sparse ? "sparse" : "dense"; }

RewardKind reward_kind_from_string(std::string_view name) {
    if (name == "sparse") return RewardKind::sparse;
    if (name == "dense") return RewardKind::dense;
    throw ConfigError("unknown reward kind '" + std::string(name) + "' (expected sparse|dense)");
}

void RewardConfig::validate() const {
    if (!(tolerance > 0)) throw ConfigError("reward tolerance must be positive");
}

double binary_reward(const Goal& achieved, const Goal& goal, bool dropped, double tolerance) {
    if (dropped) return -1.0;
    return quaternion_distance(achieved.quat, goal.quat) < tolerance ? 0.0 : -1.0;
}

double sparse_reward(const Goal& achieved, const Goal& goal, bool dropped, double tolerance) {
    return binary_reward(achieved, goal, dropped, tolerance);
}

double dense_reward(const Goal& achieved, const Goal& goal, bool dropped, double tolerance) {
    return -quaternion_distance(achieved.quat, goal.quat) + binary_reward(achieved, goal, dropped, tolerance);
}

double compute_reward(const RewardConfig& config, const Goal& achieved, const Goal& goal, bool dropped) {
    return config.kind == RewardKind::sparse ? sparse_reward(achieved, goal, dropped, config.tolerance)
                                             : dense_reward(achieved, goal, dropped, config.tolerance);
}

double min_step_reward(const RewardConfig& config) {
    return config.kind == RewardKind::sparse ? -1.0 : -kPi - 1.0;
}

}  // namespace efold
