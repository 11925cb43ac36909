#include "efold/teleop/session.hpp"

#include <chrono>
#include <cmath>

#include "efold/errors.hpp"
#include "efold/metrics.hpp"
#include "efold/trajectory_io.hpp"

namespace efold::teleop {

using nlohmann::json;

std::string_view to_string(SessionMode mode) { return mode == SessionMode::pong ? "pong" : "free"; }

std::string_view to_string(SessionStatus status) {
    switch (status) {
        case SessionStatus::idle: return "idle";
        case SessionStatus::running: return "running";
        case SessionStatus::dropped: return "dropped";
        case SessionStatus::ended: return "ended";
    }
    return "idle";
}

std::string_view to_string(Pacing pacing) { return pacing == Pacing::lockstep ? "lockstep" : "realtime"; }

json error_message(const std::string& detail) { return {{"type", "error"}, {"detail", detail}}; }
json ack_message(const std::string& detail) { return {{"type", "ack"}, {"detail", detail}}; }

namespace {

SessionMode parse_mode(const json& v) {
    if (!v.is_string()) throw UsageError("mode must be a string");
    const auto s = v.get<std::string>();
    if (s == "free") return SessionMode::free;
    if (s == "pong") return SessionMode::pong;
    throw UsageError("unknown mode '" + s + "'");
}

Pacing parse_pacing(const json& v) {
    if (!v.is_string()) throw UsageError("pacing must be a string");
    const auto s = v.get<std::string>();
    if (s == "realtime") return Pacing::realtime;
    if (s == "lockstep") return Pacing::lockstep;
    throw UsageError("unknown pacing '" + s + "'");
}

std::uint64_t parse_seed(const json& v) {
    if (!v.is_number_integer() || v.get<long long>() < 0) throw UsageError("seed must be a non-negative integer");
    return v.get<std::uint64_t>();
}

}  // namespace

Session::Session(std::string id, SessionOptions options)
    : id_(std::move(id)), options_(std::move(options)), sensor_(options_.sensor) {
    checkpoint_name_ = options_.default_checkpoint;
}

double Session::dt() const { return checkpoint_ ? checkpoint_->plant.dt : PlantConfig{}.dt; }

void Session::configure(const json& cmd) {
    // Validate everything before touching state so a bad command changes nothing.
    auto mode = mode_;
    auto pacing = pacing_;
    auto sensor = sensor_;
    auto seed = seed_;
    auto name = checkpoint_name_;
    if (cmd.contains("mode")) mode = parse_mode(cmd["mode"]);
    if (cmd.contains("pacing")) pacing = parse_pacing(cmd["pacing"]);
    if (cmd.contains("seed")) seed = parse_seed(cmd["seed"]);
    if (cmd.contains("sensor")) {
        if (!cmd["sensor"].is_string()) throw UsageError("sensor must be a string");
        try {
            sensor.kind = sensor_kind_from_string(cmd["sensor"].get<std::string>());
        } catch (const std::exception& e) {
            throw UsageError(e.what());
        }
    }
    if (cmd.contains("checkpoint")) {
        if (!cmd["checkpoint"].is_string()) throw UsageError("checkpoint must be a string");
        name = cmd["checkpoint"].get<std::string>();
    }
    if (name != checkpoint_name_ || !checkpoint_) {
        if (!name.empty()) {
            if (!options_.resolve) throw UsageError("no checkpoint resolver configured");
            std::shared_ptr<const rl::PolicyCheckpoint> loaded;
            try {
                loaded = options_.resolve(name);
            } catch (const std::exception& e) {
                throw UsageError("unknown checkpoint '" + name + "': " + e.what());
            }
            if (!loaded) throw UsageError("unknown checkpoint '" + name + "'");
            checkpoint_ = std::move(loaded);
        }
        checkpoint_name_ = name;
    }
    mode_ = mode;
    pacing_ = pacing;
    sensor_ = sensor;
    seed_ = seed;
}

void Session::begin() {
    if (!checkpoint_) throw RuntimeFault("session fault: no checkpoint selected");
    policy_ = checkpoint_->policy();
    loop_ = std::make_unique<ControlLoop>(checkpoint_->plant, checkpoint_->reward, *policy_, sensor_, seed_,
                                          Angle(0.0));
    held_goal_ = Goal(Angle(0.0));
    latch_.take();
    pong_rng_.seed(seed_ ^ 0x9e3779b97f4a7c15ULL);
    pong_ = pong_serve(options_.pong, pong_rng_);
    timing_ = {};
    status_ = SessionStatus::running;
    log_open_ = true;
    ++runs_;
}

std::optional<json> Session::finish(SessionStatus next) {
    status_ = next;
    if (!log_open_ || !loop_) return std::nullopt;
    log_open_ = false;

    const EpisodeLog& log = loop_->log();
    std::map<std::string, std::string> header{
        {"source", "teleop"},
        {"session", id_},
        {"mode", std::string(to_string(mode_))},
        {"sensor", std::string(to_string(sensor_.kind))},
        {"seed", std::to_string(seed_)},
        {"checkpoint", checkpoint_name_},
        {"hits", std::to_string(pong_.hits)},
        {"failures", std::to_string(pong_.failures)},
    };
    std::filesystem::create_directories(options_.log_dir);
    const auto path = options_.log_dir / (id_ + "-" + std::to_string(runs_) + ".csv");
    write_trajectory(path, log, header);

    json summary{{"drop", loop_->dropped()}, {"steps", log.steps.size()}};
    if (!log.steps.empty()) {
        const auto record = metrics::TrajectoryRecord::from_log(log);
        summary["mse"] = metrics::mse(record);
        summary["sat"] = metrics::saturation(record);
    } else {
        summary["mse"] = nullptr;
        summary["sat"] = nullptr;
    }
    if (mode_ == SessionMode::pong) {
        summary["hits"] = pong_.hits;
        summary["failures"] = pong_.failures;
    }
    summary["tick_ms_mean"] = timing_.mean_ms;
    summary["tick_ms_max"] = timing_.max_ms;
    summary["jitter_ms_max"] = timing_.jitter_ms_max;
    return json{{"type", "session_end"}, {"log_path", path.string()}, {"summary", summary}};
}

std::vector<json> Session::control(const json& cmd) {
    std::vector<json> out;
    const auto action = cmd.value("action", std::string{});
    try {
        if (action == "configure") {
            if (status_ != SessionStatus::idle) throw UsageError("configuration changes are allowed only when idle");
            configure(cmd);
            out.push_back(ack_message("configured"));
        } else if (action == "start") {
            if (status_ != SessionStatus::idle)
                throw UsageError("start requires an idle session (status " + std::string(to_string(status_)) + ")");
            configure(cmd);
            begin();
            out.push_back(ack_message("started"));
        } else if (action == "stop") {
            auto end = finish(SessionStatus::idle);
            out.push_back(ack_message("stopped"));
            if (end) out.push_back(*end);
        } else if (action == "reset") {
            if (status_ == SessionStatus::idle) throw UsageError("reset requires a started session");
            for (const char* key : {"mode", "sensor", "checkpoint", "pacing"})
                if (cmd.contains(key)) throw UsageError(std::string("reset cannot change ") + key);
            const auto seed = cmd.contains("seed") ? parse_seed(cmd["seed"]) : seed_;
            auto end = finish(SessionStatus::idle);
            seed_ = seed;
            begin();
            out.push_back(ack_message("reset"));
            if (end) out.push_back(*end);
        } else {
            throw UsageError(action.empty() ? "control message needs an action" : "unknown action '" + action + "'");
        }
    } catch (const std::exception& e) {
        out.insert(out.begin(), error_message(e.what()));
    }
    return out;
}

json Session::state_message(const StepRecord& rec, double tick_ms) const {
    const PlantState& st = loop_->state();
    json fingers = json::array();
    for (std::size_t i = 0; i < st.s.size(); ++i) fingers.push_back({{"s", st.s[i]}, {"n", st.n[i]}});
    return {{"type", "state"},   {"step", rec.step},     {"phi", rec.phi},         {"goal_raw", rec.goal},
            {"goal_sensed", rec.goal_sensed}, {"fingers", fingers}, {"reward", rec.reward},
            {"dropped", rec.dropped}, {"tick_ms", tick_ms}};
}

json Session::pong_message() const {
    return {{"type", "pong"},
            {"ball", {pong_.x, pong_.y}},
            {"paddle_y", pong_.paddle_y},
            {"hits", pong_.hits},
            {"failures", pong_.failures},
            {"status", pong_.status == PongStatus::active ? "active" : "ended_early"}};
}

std::vector<json> Session::tick() {
    std::vector<json> out;
    if (status_ != SessionStatus::running) return out;
    const auto t0 = std::chrono::steady_clock::now();

    if (auto g = latch_.take()) held_goal_ = *g;
    const StepRecord& rec = loop_->tick(stream_goal(std::nullopt, held_goal_));
    if (mode_ == SessionMode::pong && pong_.status == PongStatus::active)
        pong_ = pong_step(pong_, rec.phi, loop_->plant().config().dt, rec.dropped, options_.pong, pong_rng_);

    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    ++timing_.ticks;
    timing_.mean_ms += (ms - timing_.mean_ms) / timing_.ticks;
    timing_.max_ms = std::max(timing_.max_ms, ms);

    out.push_back(state_message(rec, ms));
    if (mode_ == SessionMode::pong) out.push_back(pong_message());
    if (rec.dropped) {
        if (auto end = finish(SessionStatus::dropped)) out.push_back(*end);
    }
    return out;
}

std::vector<json> handle_client_message(Session& session, const std::string& text,
                                        const std::function<void(const std::string&)>& warn) {
    json msg;
    try {
        msg = json::parse(text);
    } catch (const json::parse_error& e) {
        return {error_message(std::string("malformed message: ") + e.what())};
    }
    if (!msg.is_object() || !msg.contains("type") || !msg["type"].is_string())
        return {error_message("malformed message: expected an object with a string 'type'")};

    const auto type = msg["type"].get<std::string>();
    if (type == "control") {
        if (msg.contains("action") && !msg["action"].is_string())
            return {error_message("malformed message: 'action' must be a string")};
        return session.control(msg);
    }
    if (type == "goal") {
        if (!msg.contains("angle_rad") || !msg["angle_rad"].is_number())
            return {error_message("malformed goal: 'angle_rad' must be a number")};
        const double a = msg["angle_rad"].get<double>();
        if (!std::isfinite(a)) return {error_message("malformed goal: angle must be finite")};
        session.latch().put(Goal(Angle(a)));
        if (session.pacing() == Pacing::lockstep) return session.tick();
        return {};
    }
    if (warn) warn("ignoring unknown message type '" + type + "'");
    return {};
}

}  // namespace efold::teleop
