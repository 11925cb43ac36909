#include "efold/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <set>

#include "efold/errors.hpp"

namespace efold {

using nlohmann::json;

namespace {

/// Applies each present key through its setter; unknown keys are errors.
class Reader {
public:
    Reader(const json& j, std::string section) : j_(j), section_(std::move(section)) {
        if (!j_.is_object()) throw ConfigError("config section '" + section_ + "' must be an object");
    }

    template <typename T>
    Reader& field(const char* key, T& target) {
        known_.emplace(key);
        if (auto it = j_.find(key); it != j_.end()) {
            try {
                target = it->template get<T>();
            } catch (const json::exception& e) {
                throw ConfigError("config " + section_ + "." + key + ": " + e.what());
            }
        }
        return *this;
    }

    Reader& custom(const char* key, const std::function<void(const json&)>& apply) {
        known_.emplace(key);
        if (auto it = j_.find(key); it != j_.end()) {
            try {
                apply(*it);
            } catch (const json::exception& e) {
                throw ConfigError("config " + section_ + "." + key + ": " + e.what());
            }
        }
        return *this;
    }

    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            if (!known_.contains(key)) throw ConfigError("unknown config key '" + section_ + "." + key + "'");
        }
    }

private:
    const json& j_;
    std::string section_;
    std::set<std::string, std::less<>> known_;
};

}  // namespace

json to_json(const PlantConfig& c) {
    return {{"fingers", c.fingers},
            {"travel", c.travel},
            {"v_max", c.v_max},
            {"engage_rate", c.engage_rate},
            {"contact_threshold", c.contact_threshold},
            {"friction", c.friction},
            {"max_normal_force", c.max_normal_force},
            {"slip_velocity", c.slip_velocity},
            {"radius", c.radius},
            {"inertia", c.inertia},
            {"damping", c.damping},
            {"drop_engagement", c.drop_engagement},
            {"drop_steps", c.drop_steps},
            {"dt", c.dt},
            {"horizon", c.horizon},
            {"initial_engagement", c.initial_engagement}};
}

json to_json(const RewardConfig& c) { return {{"kind", std::string(to_string(c.kind))}, {"tolerance", c.tolerance}}; }

json to_json(const rl::TrainConfig& c) {
    return {{"epochs", c.epochs},
            {"cycles_per_epoch", c.cycles_per_epoch},
            {"episodes_per_cycle", c.episodes_per_cycle},
            {"updates_per_cycle", c.updates_per_cycle},
            {"batch_size", c.batch_size},
            {"gamma", c.gamma},
            {"polyak", c.polyak},
            {"actor_lr", c.actor_lr},
            {"critic_lr", c.critic_lr},
            {"noise_sigma", c.noise_sigma},
            {"random_action_prob", c.random_action_prob},
            {"her_k", c.her_k},
            {"buffer_capacity", c.buffer_capacity},
            {"hidden_width", c.hidden_width},
            {"normalizer_clip", c.normalizer_clip},
            {"action_l2", c.action_l2},
            {"eval_trials", c.eval_trials}};
}

json to_json(const SensorModel& c) {
    return {{"kind", std::string(to_string(c.kind))},
            {"imu_bias_walk", c.imu_bias_walk},
            {"imu_noise", c.imu_noise},
            {"camera_noise", c.camera_noise},
            {"camera_dropout", c.camera_dropout},
            {"camera_quantum", c.camera_quantum}};
}

json to_json(const teleop::PongConfig& c) {
    return {{"ball_speed", c.ball_speed},
            {"paddle_half_height", c.paddle_half_height},
            {"max_serve_angle", c.max_serve_angle}};
}

json to_json(const WorkbenchConfig& c) {
    return {{"plant", to_json(c.plant)},
            {"reward", to_json(c.reward)},
            {"training", to_json(c.training)},
            {"sensor", to_json(c.sensor)},
            {"pong", to_json(c.pong)},
            {"service", {{"bind_address", c.service.bind_address}, {"port", c.service.port}}},
            {"logging", {{"directory", c.logging.directory}}}};
}

PlantConfig plant_config_from_json(const json& j, PlantConfig c) {
    Reader(j, "plant")
        .field("fingers", c.fingers)
        .field("travel", c.travel)
        .field("v_max", c.v_max)
        .field("engage_rate", c.engage_rate)
        .field("contact_threshold", c.contact_threshold)
        .field("friction", c.friction)
        .field("max_normal_force", c.max_normal_force)
        .field("slip_velocity", c.slip_velocity)
        .field("radius", c.radius)
        .field("inertia", c.inertia)
        .field("damping", c.damping)
        .field("drop_engagement", c.drop_engagement)
        .field("drop_steps", c.drop_steps)
        .field("dt", c.dt)
        .field("horizon", c.horizon)
        .field("initial_engagement", c.initial_engagement)
        .finish();
    c.validate();
    return c;
}

RewardConfig reward_config_from_json(const json& j, RewardConfig c) {
    bool tolerance_given = j.is_object() && j.contains("tolerance");
    Reader(j, "reward")
        .custom("kind", [&](const json& v) { c.kind = reward_kind_from_string(v.get<std::string>()); })
        .field("tolerance", c.tolerance)
        .finish();
    if (!tolerance_given) c.tolerance = RewardConfig::for_kind(c.kind).tolerance;
    c.validate();
    return c;
}

rl::TrainConfig train_config_from_json(const json& j, rl::TrainConfig c) {
    Reader(j, "training")
        .field("epochs", c.epochs)
        .field("cycles_per_epoch", c.cycles_per_epoch)
        .field("episodes_per_cycle", c.episodes_per_cycle)
        .field("updates_per_cycle", c.updates_per_cycle)
        .field("batch_size", c.batch_size)
        .field("gamma", c.gamma)
        .field("polyak", c.polyak)
        .field("actor_lr", c.actor_lr)
        .field("critic_lr", c.critic_lr)
        .field("noise_sigma", c.noise_sigma)
        .field("random_action_prob", c.random_action_prob)
        .field("her_k", c.her_k)
        .field("buffer_capacity", c.buffer_capacity)
        .field("hidden_width", c.hidden_width)
        .field("normalizer_clip", c.normalizer_clip)
        .field("action_l2", c.action_l2)
        .field("eval_trials", c.eval_trials)
        .finish();
    c.validate();
    return c;
}

SensorModel sensor_model_from_json(const json& j, SensorModel c) {
    Reader(j, "sensor")
        .custom("kind", [&](const json& v) { c.kind = sensor_kind_from_string(v.get<std::string>()); })
        .field("imu_bias_walk", c.imu_bias_walk)
        .field("imu_noise", c.imu_noise)
        .field("camera_noise", c.camera_noise)
        .field("camera_dropout", c.camera_dropout)
        .field("camera_quantum", c.camera_quantum)
        .finish();
    c.validate();
    return c;
}

teleop::PongConfig pong_config_from_json(const json& j, teleop::PongConfig c) {
    Reader(j, "pong")
        .field("ball_speed", c.ball_speed)
        .field("paddle_half_height", c.paddle_half_height)
        .field("max_serve_angle", c.max_serve_angle)
        .finish();
    c.validate();
    return c;
}

void WorkbenchConfig::validate() const {
    plant.validate();
    reward.validate();
    training.validate();
    sensor.validate();
    pong.validate();
    if (service.port < 0 || service.port > 65535) throw ConfigError("service.port out of range");
}

WorkbenchConfig workbench_config_from_json(const json& j, WorkbenchConfig c) {
    Reader(j, "<root>")
        .custom("plant", [&](const json& v) { c.plant = plant_config_from_json(v, c.plant); })
        .custom("reward", [&](const json& v) { c.reward = reward_config_from_json(v, c.reward); })
        .custom("training", [&](const json& v) { c.training = train_config_from_json(v, c.training); })
        .custom("sensor", [&](const json& v) { c.sensor = sensor_model_from_json(v, c.sensor); })
        .custom("pong", [&](const json& v) { c.pong = pong_config_from_json(v, c.pong); })
        .custom("service",
                [&](const json& v) {
                    Reader(v, "service")
                        .field("bind_address", c.service.bind_address)
                        .field("port", c.service.port)
                        .finish();
                })
        .custom("logging", [&](const json& v) { Reader(v, "logging").field("directory", c.logging.directory).finish(); })
        .finish();
    c.validate();
    return c;
}

WorkbenchConfig load_workbench_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
    }
    return workbench_config_from_json(j);
}

void save_workbench_config(const WorkbenchConfig& config, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write config file " + path.string());
    out << to_json(config).dump(2) << '\n';
}

}  // namespace efold
