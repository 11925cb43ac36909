#pragma once

#include <memory>
#include <random>
#include <span>
#include <vector>

#include "efold/core.hpp"
#include "efold/plant.hpp"

namespace efold {

/// Anything that maps an observation to an action.
class Policy {
public:
    virtual ~Policy() = default;
    virtual Action act(std::span<const double> obs) = 0;
    /// Clears per-episode internal state (no-op for stateless policies).
    virtual void reset() {}
};

class ZeroPolicy final : public Policy {
public:
    explicit ZeroPolicy(int fingers) : size_(action_size(static_cast<std::size_t>(fingers))) {}
    Action act(std::span<const double>) override { return Action(size_, 0.0); }

private:
    std::size_t size_;
};

class RandomPolicy final : public Policy {
public:
    RandomPolicy(int fingers, std::uint64_t seed)
        : size_(action_size(static_cast<std::size_t>(fingers))), rng_(seed) {}
    Action act(std::span<const double> obs) override;

private:
    std::size_t size_;
    std::mt19937_64 rng_;
};

/// Hand-written finger-gaiting controller. Fingers alternate between driving
/// strokes and release/return strokes so that at least `min_driving` of them
/// hold the object at all times; the driving velocity follows a saturated
/// proportional law on the wrapped yaw error.
class ScriptedGaitPolicy final : public Policy {
public:
    struct Gains {
        double yaw_gain = 5.0;       // 1/s
        double rate_gain = 0.3;      // s
        double hold_engagement = 0.35;
        double margin = 0.05;        // travel margin before switching
        int min_driving = 1;
    };

    explicit ScriptedGaitPolicy(PlantConfig plant);
    ScriptedGaitPolicy(PlantConfig plant, Gains gains);

    Action act(std::span<const double> obs) override;
    void reset() override;

private:
    enum class Phase { drive, light, release, reposition, engage };

    PlantConfig plant_;
    Gains gains_;
    std::vector<Phase> phase_;
};

}  // namespace efold
