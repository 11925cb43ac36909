#include "efold/rl/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "efold/config.hpp"
#include "efold/errors.hpp"

namespace efold::rl {

using nlohmann::json;

namespace {

constexpr const char* kFormatTag = "efold-checkpoint";

json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vector_from(const json& j) {
    const auto values = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

json network_json(const Mlp& net) {
    return {{"layers", net.layer_sizes()},
            {"output", net.output_activation() == OutputActivation::tanh ? "tanh" : "linear"},
            {"parameters", vector_json(net.parameters())}};
}

Mlp network_from(const json& j, const char* name) {
    const auto layers = j.at("layers").get<std::vector<int>>();
    const std::string out = j.at("output").get<std::string>();
    if (out != "tanh" && out != "linear") throw LoadError(std::string("checkpoint ") + name + ": bad output activation");
    Mlp net(layers, out == "tanh" ? OutputActivation::tanh : OutputActivation::linear);
    Eigen::VectorXd params = vector_from(j.at("parameters"));
    if (params.size() != net.parameter_count()) {
        throw LoadError(std::string("checkpoint ") + name + ": expected " + std::to_string(net.parameter_count()) +
                        " parameters, found " + std::to_string(params.size()));
    }
    net.parameters() = std::move(params);
    return net;
}

}  // namespace

void save_checkpoint(const PolicyCheckpoint& c, const std::filesystem::path& path) {
    json j;
    j["format"] = kFormatTag;
    j["version"] = PolicyCheckpoint::kFormatVersion;
    j["plant"] = to_json(c.plant);
    j["reward"] = to_json(c.reward);
    j["training"] = to_json(c.training);
    j["seed"] = c.seed;
    j["run_index"] = c.run_index;
    j["epochs_completed"] = c.epochs_completed;
    j["normalizer"] = {{"clip", c.normalizer.clip()},
                       {"min_std", c.normalizer.min_std()},
                       {"count", c.normalizer.count()},
                       {"mean", vector_json(c.normalizer.mean())},
                       {"m2", vector_json(c.normalizer.m2())}};
    j["networks"] = {{"actor", network_json(c.actor)},
                     {"critic", network_json(c.critic)},
                     {"actor_target", network_json(c.actor_target)},
                     {"critic_target", network_json(c.critic_target)}};

    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw RuntimeFault("cannot write checkpoint " + path.string());
        out << j.dump() << '\n';
        if (!out) throw RuntimeFault("failed writing checkpoint " + path.string());
    }
    std::filesystem::rename(tmp, path);
}

PolicyCheckpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open checkpoint " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw LoadError("checkpoint " + path.string() + " is truncated or corrupt: " + e.what());
    }
    try {
        if (!j.is_object() || j.value("format", "") != kFormatTag) {
            throw LoadError("checkpoint " + path.string() + ": not an efold checkpoint");
        }
        const int version = j.at("version").get<int>();
        if (version != PolicyCheckpoint::kFormatVersion) {
            throw LoadError("checkpoint " + path.string() + ": format version " + std::to_string(version) +
                            " (this build reads version " + std::to_string(PolicyCheckpoint::kFormatVersion) + ")");
        }
        PolicyCheckpoint c;
        c.plant = plant_config_from_json(j.at("plant"));
        c.reward = reward_config_from_json(j.at("reward"));
        c.training = train_config_from_json(j.at("training"));
        c.seed = j.at("seed").get<std::uint64_t>();
        c.run_index = j.at("run_index").get<int>();
        c.epochs_completed = j.at("epochs_completed").get<int>();
        const json& nets = j.at("networks");
        c.actor = network_from(nets.at("actor"), "actor");
        c.critic = network_from(nets.at("critic"), "critic");
        c.actor_target = network_from(nets.at("actor_target"), "actor_target");
        c.critic_target = network_from(nets.at("critic_target"), "critic_target");
        const json& nj = j.at("normalizer");
        c.normalizer = Normalizer(0, nj.at("clip").get<double>(), nj.at("min_std").get<double>());
        c.normalizer.restore(vector_from(nj.at("mean")), vector_from(nj.at("m2")), nj.at("count").get<double>());

        const auto k = static_cast<int>(c.plant.fingers);
        const int obs = static_cast<int>(observation_size(static_cast<std::size_t>(k)));
        const int act = static_cast<int>(action_size(static_cast<std::size_t>(k)));
        if (c.actor.input_size() != obs || c.actor.output_size() != act || c.critic.input_size() != obs + act ||
            c.critic.output_size() != 1 || c.normalizer.size() != obs || c.actor.layer_count() != 5 ||
            c.critic.layer_count() != 5 || !(c.actor_target.layer_sizes() == c.actor.layer_sizes()) ||
            !(c.critic_target.layer_sizes() == c.critic.layer_sizes())) {
            throw LoadError("checkpoint " + path.string() + ": network shapes disagree with the stored plant config");
        }
        return c;
    } catch (const json::exception& e) {
        throw LoadError("checkpoint " + path.string() + " is malformed: " + e.what());
    } catch (const ConfigError& e) {
        throw LoadError("checkpoint " + path.string() + " has an invalid config: " + e.what());
    }
}

void require_compatible(const PolicyCheckpoint& checkpoint, const PlantConfig& plant) {
    if (checkpoint.plant.fingers != plant.fingers) {
        std::ostringstream msg;
        msg << "checkpoint was trained for " << checkpoint.plant.fingers << " fingers (observation size "
            << observation_size(static_cast<std::size_t>(checkpoint.plant.fingers)) << "), plant has "
            << plant.fingers << " (observation size " << observation_size(static_cast<std::size_t>(plant.fingers))
            << ")";
        throw ConfigError(msg.str());
    }
}

}  // namespace efold::rl
