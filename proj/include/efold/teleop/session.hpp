#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "efold/goals.hpp"
#include "efold/plant.hpp"
#include "efold/policy.hpp"
#include "efold/reward.hpp"
#include "efold/rl/checkpoint.hpp"
#include "efold/rollout.hpp"
#include "efold/teleop/pong.hpp"

namespace efold::teleop {

enum class SessionMode { free, pong };
enum class SessionStatus { idle, running, dropped, ended };

/// realtime: the server clock ticks at 1/dt and the latch supplies the goal.
/// lockstep: every goal message drives exactly one tick, so a scripted
/// client can reproduce a headless replay bit for bit.
enum class Pacing { realtime, lockstep };

std::string_view to_string(SessionMode mode);
std::string_view to_string(SessionStatus status);
std::string_view to_string(Pacing pacing);

using CheckpointResolver = std::function<std::shared_ptr<const rl::PolicyCheckpoint>(const std::string&)>;

struct SessionOptions {
    RewardConfig reward;   // used only when no checkpoint is selected yet
    SensorModel sensor;
    PongConfig pong;
    std::filesystem::path log_dir = "efold_logs";
    std::string default_checkpoint;
    CheckpointResolver resolve;  // throws on unknown names
};

struct TickTiming {
    int ticks = 0;
    double mean_ms = 0.0;
    double max_ms = 0.0;
    double jitter_ms_max = 0.0;  // wall-clock lateness of realtime ticks
};

/// One operator session: plant + noise-free policy + goal latch + sensor,
/// optionally driving Pong. Owned by a single control thread; only the goal
/// latch is safe to touch from elsewhere.
class Session {
public:
    Session(std::string id, SessionOptions options);

    const std::string& id() const { return id_; }
    SessionStatus status() const { return status_; }
    SessionMode mode() const { return mode_; }
    Pacing pacing() const { return pacing_; }
    const SensorModel& sensor() const { return sensor_; }
    const PongState& pong() const { return pong_; }
    const ControlLoop* loop() const { return loop_.get(); }
    const TickTiming& timing() const { return timing_; }
    GoalLatch& latch() { return latch_; }
    double dt() const;
    void note_jitter(double ms) { timing_.jitter_ms_max = std::max(timing_.jitter_ms_max, ms); }

    /// Handles one control command. Returns the ack or error, followed by a
    /// session_end message when the command closes a log.
    std::vector<nlohmann::json> control(const nlohmann::json& command);

    /// One control step. Returns state (+ pong) messages, and session_end if
    /// the object dropped. No-op unless running.
    std::vector<nlohmann::json> tick();

    /// Persists the current log if it has not been persisted yet.
    std::optional<nlohmann::json> finish(SessionStatus next);

private:
    void configure(const nlohmann::json& command);
    void begin();
    nlohmann::json state_message(const StepRecord& rec, double tick_ms) const;
    nlohmann::json pong_message() const;

    std::string id_;
    SessionOptions options_;
    SessionMode mode_ = SessionMode::free;
    Pacing pacing_ = Pacing::realtime;
    SensorModel sensor_;
    std::uint64_t seed_ = 0;
    std::string checkpoint_name_;
    std::shared_ptr<const rl::PolicyCheckpoint> checkpoint_;
    std::unique_ptr<Policy> policy_;
    std::unique_ptr<ControlLoop> loop_;
    GoalLatch latch_;
    Goal held_goal_{Angle(0.0)};
    PongState pong_;
    std::mt19937_64 pong_rng_;
    SessionStatus status_ = SessionStatus::idle;
    bool log_open_ = false;
    int runs_ = 0;
    TickTiming timing_;
};

/// Parses one client frame and routes it. Goal messages go to the latch (and
/// tick immediately in lockstep pacing); unknown types are ignored with a
/// warning through `warn`; malformed frames produce an error message.
std::vector<nlohmann::json> handle_client_message(Session& session, const std::string& text,
                                                  const std::function<void(const std::string&)>& warn = {});

nlohmann::json error_message(const std::string& detail);
nlohmann::json ack_message(const std::string& detail);

}  // namespace efold::teleop
