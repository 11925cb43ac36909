#pragma once

#include <string>
#include <string_view>

#include "efold/core.hpp"

namespace efold {

inline constexpr double kSparseTolerance = 0.1;
inline constexpr double kDenseTolerance = 0.05;

enum class RewardKind { sparse, dense };

std::string_view to_string(RewardKind kind);
/// Throws ConfigError for anything other than "sparse" / "dense".
RewardKind reward_kind_from_string(std::string_view name);

struct RewardConfig {
    RewardKind kind = RewardKind::dense;
    double tolerance = kDenseTolerance;

    static RewardConfig sparse() { return {RewardKind::sparse, kSparseTolerance}; }
    static RewardConfig dense() { return {RewardKind::dense, kDenseTolerance}; }
    static RewardConfig for_kind(RewardKind kind) { return kind == RewardKind::sparse ? sparse() : dense(); }

    void validate() const;
    friend bool operator==(const RewardConfig&, const RewardConfig&) = default;
};

/// r_b: 0 when within tolerance and still held, -1 otherwise.
double binary_reward(const Goal& achieved, const Goal& goal, bool dropped, double tolerance);

double sparse_reward(const Goal& achieved, const Goal& goal, bool dropped,
                     double tolerance = kSparseTolerance);

/// R = -2*acos(|<q_a, q_g>|) + r_b. Range [-pi - 1, 0].
double dense_reward(const Goal& achieved, const Goal& goal, bool dropped,
                    double tolerance = kDenseTolerance);

double compute_reward(const RewardConfig& config, const Goal& achieved, const Goal& goal, bool dropped);

/// Smallest per-step reward the configuration can produce.
double min_step_reward(const RewardConfig& config);

}  // namespace efold
