#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "efold/goals.hpp"
#include "efold/plant.hpp"
#include "efold/reward.hpp"
#include "efold/rl/ddpg.hpp"
#include "efold/teleop/pong.hpp"

namespace efold {

struct ServiceConfig {
    std::string bind_address = "127.0.0.1";
    int port = 8765;
    friend bool operator==(const ServiceConfig&, const ServiceConfig&) = default;
};

struct LoggingConfig {
    std::string directory = "efold_logs";
    friend bool operator==(const LoggingConfig&, const LoggingConfig&) = default;
};

/// Everything the command-line tools read from a config file. Every section
/// and key is optional; missing keys keep their defaults, unknown keys are
/// rejected.
struct WorkbenchConfig {
    PlantConfig plant;
    RewardConfig reward;
    rl::TrainConfig training;
    SensorModel sensor;
    teleop::PongConfig pong;
    ServiceConfig service;
    LoggingConfig logging;

    void validate() const;
    friend bool operator==(const WorkbenchConfig&, const WorkbenchConfig&) = default;
};

nlohmann::json to_json(const PlantConfig& c);
nlohmann::json to_json(const RewardConfig& c);
nlohmann::json to_json(const rl::TrainConfig& c);
nlohmann::json to_json(const SensorModel& c);
nlohmann::json to_json(const teleop::PongConfig& c);
nlohmann::json to_json(const WorkbenchConfig& c);

// Strict readers: start from `base`, overwrite the keys present, throw
// ConfigError on unknown keys or wrongly typed values.
PlantConfig plant_config_from_json(const nlohmann::json& j, PlantConfig base = {});
RewardConfig reward_config_from_json(const nlohmann::json& j, RewardConfig base = {});
rl::TrainConfig train_config_from_json(const nlohmann::json& j, rl::TrainConfig base = {});
SensorModel sensor_model_from_json(const nlohmann::json& j, SensorModel base = {});
teleop::PongConfig pong_config_from_json(const nlohmann::json& j, teleop::PongConfig base = {});
WorkbenchConfig workbench_config_from_json(const nlohmann::json& j, WorkbenchConfig base = {});

WorkbenchConfig load_workbench_config(const std::filesystem::path& path);
void save_workbench_config(const WorkbenchConfig& config, const std::filesystem::path& path);

}  // namespace efold
