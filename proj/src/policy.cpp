#include "efold/policy.hpp"

#include <algorithm>
#include <cmath>

namespace efold {

Action RandomPolicy::act(std::span<const double>) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Action a(size_);
    for (double& v : a) v = dist(rng_);
    return a;
}

ScriptedGaitPolicy::ScriptedGaitPolicy(PlantConfig plant) : ScriptedGaitPolicy(plant, Gains{}) {}

ScriptedGaitPolicy::ScriptedGaitPolicy(PlantConfig plant, Gains gains) : plant_(plant), gains_(gains) {
    plant_.validate();
}

void ScriptedGaitPolicy::reset() { phase_.clear(); }

Action ScriptedGaitPolicy::act(std::span<const double> obs) {
    const auto k = static_cast<std::size_t>(plant_.fingers);
    const std::size_t obj = 4 * k;
    const std::size_t goal_at = obj + 13;
    const Angle phi = observation_yaw(obs);
    const Angle goal = quaternion_to_yaw({obs[goal_at + 3], obs[goal_at + 4], obs[goal_at + 5], obs[goal_at + 6]});
    const double phidot = obs[obj + 12];
    const double error = (goal - phi).value();

    const double surface = plant_.radius * phidot;
    const double v_des = std::clamp(gains_.yaw_gain * error * plant_.radius, -plant_.v_max, plant_.v_max);
    const double dir = std::abs(v_des) < 1e-3 ? 0.0 : (v_des > 0 ? 1.0 : -1.0);
    const double hover = 0.99 * plant_.contact_threshold;
    const double light = 1.05 * plant_.contact_threshold;
    const double edge = plant_.travel - gains_.margin;
    const double step_n = plant_.engage_rate * plant_.dt;

    auto engagement_cmd = [&](double n, double target) { return std::clamp((target - n) / step_n, -1.0, 1.0); };
    auto speed_cmd = [&](double v) { return std::clamp(v / plant_.v_max, -1.0, 1.0); };

    if (phase_.size() != k) {
        // Split the hand into a driving group and a returning group.
        phase_.assign(k, Phase::drive);
        for (std::size_t i = (k + 1) / 2; i < k; ++i) phase_[i] = Phase::release;
    }

    auto driving_others = [&](std::size_t skip) {
        int count = 0;
        for (std::size_t j = 0; j < k; ++j) {
            if (j != skip && phase_[j] == Phase::drive && obs[2 * j + 1] >= plant_.contact_threshold &&
                dir * obs[2 * j] < edge) {
                ++count;
            }
        }
        return count;
    };

    Action a(2 * k, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        const double s = obs[2 * i];
        const double n = obs[2 * i + 1];
        switch (phase_[i]) {
            case Phase::drive:
                if (dir != 0.0 && dir * s >= edge) {
                    phase_[i] = driving_others(i) >= gains_.min_driving ? Phase::release : Phase::light;
                }
                break;
            case Phase::light:
                if (dir == 0.0 || dir * s < edge) {
                    phase_[i] = Phase::drive;
                } else if (driving_others(i) >= gains_.min_driving) {
                    phase_[i] = Phase::release;
                }
                break;
            case Phase::release:
                if (n < plant_.contact_threshold) phase_[i] = Phase::reposition;
                break;
            case Phase::reposition:
                if (dir == 0.0 || dir * s <= -edge) phase_[i] = Phase::engage;
                break;
            case Phase::engage:
                if (n >= gains_.hold_engagement - 1e-6) phase_[i] = Phase::drive;
                break;
        }
        double a_s = 0.0;
        double a_n = 0.0;
        switch (phase_[i]) {
            case Phase::drive:
                a_s = speed_cmd(v_des);
                a_n = engagement_cmd(n, gains_.hold_engagement);
                break;
            case Phase::light:
                // Pinned at the travel limit: keep just enough grip to hold on.
                a_s = speed_cmd(v_des);
                a_n = engagement_cmd(n, light);
                break;
            case Phase::release:
                a_s = speed_cmd(surface);
                a_n = engagement_cmd(n, hover);
                break;
            case Phase::reposition:
                a_s = speed_cmd(-dir * plant_.v_max);
                a_n = engagement_cmd(n, hover);
                break;
            case Phase::engage:
                a_s = speed_cmd(surface);
                a_n = engagement_cmd(n, gains_.hold_engagement);
                break;
        }
        a[2 * i] = a_s;
        a[2 * i + 1] = a_n;
    }
    return a;
}

}  // namespace efold
