#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "efold/core.hpp"
#include "efold/goals.hpp"

namespace efold::teleop {

/// Blocking websocket client for scripts and tests.
class Client {
public:
    Client(const std::string& host, unsigned short port);
    ~Client();

    Client(const Client&) = delete;
    Client& operator=(const Client&) = delete;

    void send(const nlohmann::json& message);
    void send_text(const std::string& text);

    /// Next server message; throws RuntimeFault on a closed connection.
    nlohmann::json receive();

    /// Reads until a message of `type` arrives; others are discarded unless
    /// `skipped` is given.
    nlohmann::json receive_until(const std::string& type, std::vector<nlohmann::json>* skipped = nullptr);

    void close();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct RemoteReplay {
    std::vector<nlohmann::json> states;
    nlohmann::json session_end;
};

/// Drives a lockstep session with one goal message per step and stops it.
/// The server persists the trajectory; its path is in session_end.log_path.
RemoteReplay replay_remote(Client& client, const std::vector<double>& goals, std::uint64_t seed, SensorKind sensor,
                           const std::string& checkpoint = {});

}  // namespace efold::teleop
