#include <doctest.h>

#include <filesystem>

#include "efold/errors.hpp"
#include "efold/teleop/session.hpp"
#include "efold/trajectory_io.hpp"
#include "efold/workbench.hpp"
#include "fixtures.hpp"

using namespace efold;
using namespace efold::teleop;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

SessionOptions options(const std::string& dir) {
    auto good = std::make_shared<const rl::PolicyCheckpoint>(testing::small_checkpoint(1));
    auto drop = std::make_shared<const rl::PolicyCheckpoint>(testing::releasing_checkpoint(1));
    SessionOptions o;
    o.log_dir = fs::path(EFOLD_TEST_TMP) / "session" / dir;
    fs::remove_all(o.log_dir);
    o.default_checkpoint = "good";
    o.resolve = [good, drop](const std::string& name) -> std::shared_ptr<const rl::PolicyCheckpoint> {
        if (name == "good") return good;
        if (name == "drop") return drop;
        throw LoadError("no such checkpoint");
    };
    return o;
}

std::vector<json> send(Session& s, const json& msg) { return handle_client_message(s, msg.dump()); }

json control(const std::string& action, json extra = json::object()) {
    extra["type"] = "control";
    extra["action"] = action;
    return extra;
}

json goal(double a) { return {{"type", "goal"}, {"angle_rad", a}}; }

}  // namespace

TEST_CASE("state machine") {
    Session s("t1", options("machine"));
    CHECK(s.status() == SessionStatus::idle);
    CHECK(s.tick().empty());

    auto out = send(s, control("reset"));
    REQUIRE(out.size() == 1);
    CHECK(out[0]["type"] == "error");

    out = send(s, control("configure", {{"mode", "pong"}, {"sensor", "camera"}}));
    CHECK(out[0]["type"] == "ack");
    CHECK(s.mode() == SessionMode::pong);
    CHECK(s.sensor().kind == SensorKind::camera);

    out = send(s, control("start", {{"seed", 9}}));
    CHECK(out[0]["type"] == "ack");
    CHECK(s.status() == SessionStatus::running);

    out = send(s, control("start"));
    CHECK(out[0]["type"] == "error");
    out = send(s, control("configure", {{"mode", "free"}}));
    CHECK(out[0]["type"] == "error");
    CHECK(s.mode() == SessionMode::pong);
    out = send(s, control("reset", {{"sensor", "imu"}}));
    CHECK(out[0]["type"] == "error");

    for (int i = 0; i < 5; ++i) {
        const auto msgs = s.tick();
        REQUIRE(msgs.size() == 2);
        CHECK(msgs[0]["type"] == "state");
        CHECK(msgs[0]["step"] == i);
        CHECK(msgs[0]["fingers"].size() == 5);
        CHECK(msgs[1]["type"] == "pong");
    }

    out = send(s, control("reset", {{"seed", 10}}));
    REQUIRE(out.size() == 2);
    CHECK(out[0]["detail"] == "reset");
    CHECK(out[1]["type"] == "session_end");
    CHECK(out[1]["summary"]["steps"] == 5);
    CHECK(s.status() == SessionStatus::running);
    CHECK(s.loop()->steps() == 0);

    out = send(s, control("stop"));
    REQUIRE(out.size() == 2);
    CHECK(out[1]["type"] == "session_end");
    CHECK(out[1]["summary"]["steps"] == 0);
    CHECK(s.status() == SessionStatus::idle);

    // Stopping twice persists nothing new.
    out = send(s, control("stop"));
    CHECK(out.size() == 1);
}

TEST_CASE("malformed and unknown messages") {
    Session s("t2", options("malformed"));
    CHECK(handle_client_message(s, "{not json")[0]["type"] == "error");
    CHECK(handle_client_message(s, "[1,2]")[0]["type"] == "error");
    CHECK(handle_client_message(s, R"({"type":5})")[0]["type"] == "error");
    CHECK(handle_client_message(s, R"({"type":"goal"})")[0]["type"] == "error");
    CHECK(handle_client_message(s, R"({"type":"goal","angle_rad":"x"})")[0]["type"] == "error");
    CHECK(handle_client_message(s, R"({"type":"control","action":3})")[0]["type"] == "error");
    CHECK(send(s, control("dance"))[0]["type"] == "error");
    CHECK(send(s, control("start", {{"checkpoint", "nope"}}))[0]["type"] == "error");
    CHECK(s.status() == SessionStatus::idle);
    CHECK(send(s, control("start", {{"pacing", "sometimes"}}))[0]["type"] == "error");
    CHECK(send(s, control("start", {{"seed", -1}}))[0]["type"] == "error");
    CHECK(s.status() == SessionStatus::idle);

    std::string warned;
    CHECK(handle_client_message(s, R"({"type":"telemetry"})", [&](const std::string& w) { warned = w; }).empty());
    CHECK(warned.find("telemetry") != std::string::npos);
}

TEST_CASE("goals hold between messages") {
    Session s("t3", options("hold"));
    send(s, control("start"));
    send(s, goal(0.4));
    CHECK(s.tick()[0]["goal_raw"] == 0.4);
    CHECK(s.tick()[0]["goal_raw"] == 0.4);
    send(s, goal(-0.2));
    send(s, goal(0.1));  // latest wins
    CHECK(s.tick()[0]["goal_raw"] == 0.1);
}

TEST_CASE("lockstep session equals the headless replay and persists a readable log") {
    const auto opts = options("lockstep");
    Session s("t4", opts);
    REQUIRE(send(s, control("start", {{"pacing", "lockstep"}, {"sensor", "imu"}, {"seed", 77}}))[0]["type"] == "ack");
    std::vector<double> goals;
    for (int i = 0; i < 60; ++i) goals.push_back(0.8 * std::sin(0.07 * i));
    std::vector<json> states;
    for (double g : goals) {
        const auto out = send(s, goal(g));
        REQUIRE(out.size() == 1);
        states.push_back(out[0]);
    }
    const auto end = send(s, control("stop"));
    REQUIRE(end.size() == 2);

    SensorModel imu;
    imu.kind = SensorKind::imu;
    const auto log = replay_goals(*opts.resolve("good"), goals, imu, 77);
    REQUIRE(log.steps.size() == states.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
        CHECK(states[i]["phi"].get<double>() == log.steps[i].phi);
        CHECK(states[i]["goal_sensed"].get<double>() == log.steps[i].goal_sensed);
    }

    const fs::path path = end[1]["log_path"].get<std::string>();
    REQUIRE(fs::exists(path));
    const auto file = read_trajectory(path);
    CHECK(file.header.at("source") == "teleop");
    CHECK(file.header.at("sensor") == "imu");
    CHECK(file.header.at("seed") == "77");
    REQUIRE(file.log.steps.size() == log.steps.size());
    for (std::size_t i = 0; i < log.steps.size(); ++i) {
        CHECK(file.log.steps[i].phi == log.steps[i].phi);
        CHECK(file.log.steps[i].action == log.steps[i].action);
    }
    CHECK(end[1]["summary"]["mse"].get<double>() ==
          doctest::Approx(metrics::mse(metrics::TrajectoryRecord::from_log(log))));
}

TEST_CASE("a drop ends the run and freezes pong") {
    Session s("t5", options("drop"));
    REQUIRE(send(s, control("start", {{"checkpoint", "drop"}, {"mode", "pong"}}))[0]["type"] == "ack");
    json last_pong, end;
    for (int i = 0; i < 500 && s.status() == SessionStatus::running; ++i) {
        for (const auto& m : s.tick()) {
            if (m["type"] == "pong") last_pong = m;
            if (m["type"] == "session_end") end = m;
        }
    }
    CHECK(s.status() == SessionStatus::dropped);
    REQUIRE(end.is_object());
    CHECK(end["summary"]["drop"] == true);
    CHECK(last_pong["status"] == "ended_early");
    CHECK(s.tick().empty());
    CHECK(send(s, goal(0.3)).empty());

    // After a drop the operator can restart with reset or stop + start.
    CHECK(send(s, control("reset"))[0]["type"] == "ack");
    CHECK(s.status() == SessionStatus::running);
    CHECK(fs::exists(end["log_path"].get<std::string>()));
}
