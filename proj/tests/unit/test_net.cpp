#include <doctest.h>

#include <filesystem>
#include <thread>

#include "efold/errors.hpp"
#include "efold/teleop/client.hpp"
#include "efold/teleop/server.hpp"
#include "efold/trajectory_io.hpp"
#include "efold/workbench.hpp"
#include "fixtures.hpp"

using namespace efold;
using namespace efold::teleop;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

/// Server on an ephemeral port, running on its own thread.
struct LiveServer {
    std::shared_ptr<const rl::PolicyCheckpoint> checkpoint =
        std::make_shared<const rl::PolicyCheckpoint>(testing::small_checkpoint(2));
    std::unique_ptr<Server> server;
    std::thread thread;

    explicit LiveServer(const std::string& dir) {
        ServerOptions o;
        o.port = 0;
        o.session.log_dir = fs::path(EFOLD_TEST_TMP) / "net" / dir;
        fs::remove_all(o.session.log_dir);
        o.session.default_checkpoint = "main";
        auto ck = checkpoint;
        o.session.resolve = [ck](const std::string& name) -> std::shared_ptr<const rl::PolicyCheckpoint> {
            if (name == "main") return ck;
            throw LoadError("unknown");
        };
        server = std::make_unique<Server>(std::move(o));
        thread = std::thread([this] { server->run(); });
    }
    ~LiveServer() {
        server->stop();
        thread.join();
    }
};

}  // namespace

TEST_CASE("remote lockstep replay is bit-exact with the headless replay") {
    LiveServer live("replay");
    Client client("127.0.0.1", live.server->port());
    std::vector<double> goals;
    for (int i = 0; i < 120; ++i) goals.push_back(i < 30 ? 0.0 : 1.0 - 0.01 * i);

    const auto remote = replay_remote(client, goals, 31, SensorKind::camera);
    REQUIRE(remote.states.size() == goals.size());

    SensorModel camera;
    camera.kind = SensorKind::camera;
    const auto local = replay_goals(*live.checkpoint, goals, camera, 31);
    const auto file = read_trajectory(remote.session_end["log_path"].get<std::string>());
    REQUIRE(file.log.steps.size() == local.steps.size());
    for (std::size_t i = 0; i < local.steps.size(); ++i) {
        const auto& a = file.log.steps[i];
        const auto& b = local.steps[i];
        REQUIRE(a.phi == b.phi);
        REQUIRE(a.goal_sensed == b.goal_sensed);
        REQUIRE(a.action == b.action);
        REQUIRE(a.reward == b.reward);
    }

    // Per-tick compute at the 25 Hz budget.
    double worst = 0.0;
    for (const auto& s : remote.states) worst = std::max(worst, s["tick_ms"].get<double>());
    CHECK(worst < 10.0);
    CHECK(remote.session_end["summary"]["tick_ms_max"].get<double>() < 10.0);
}

TEST_CASE("realtime session streams well-formed state at the plant rate") {
    LiveServer live("realtime");
    Client client("127.0.0.1", live.server->port());
    client.send({{"type", "control"}, {"action", "start"}, {"mode", "pong"}});
    CHECK(client.receive_until("ack")["detail"] == "started");
    client.send({{"type", "goal"}, {"angle_rad", 0.3}});

    const auto t0 = std::chrono::steady_clock::now();
    int states = 0, pongs = 0;
    while (states < 25) {
        const auto m = client.receive();
        if (m["type"] == "state") {
            ++states;
            CHECK(m.contains("phi"));
            CHECK(m.contains("goal_sensed"));
            CHECK(m["fingers"].size() == 5);
        } else if (m["type"] == "pong") {
            ++pongs;
            CHECK(m["ball"].size() == 2);
        }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(pongs >= 24);
    // 25 ticks at 25 Hz take about one second.
    CHECK(secs > 0.8);
    CHECK(secs < 3.0);

    client.send({{"type", "control"}, {"action", "stop"}});
    const auto end = client.receive_until("session_end");
    CHECK(end["summary"]["steps"].get<int>() >= 25);
    CHECK(fs::exists(end["log_path"].get<std::string>()));
}

TEST_CASE("bad frames get error replies and the connection survives") {
    LiveServer live("errors");
    Client client("127.0.0.1", live.server->port());
    client.send_text("{{{");
    CHECK(client.receive()["type"] == "error");
    client.send({{"type", "control"}, {"action", "reset"}});
    CHECK(client.receive()["type"] == "error");
    client.send({{"type", "whatever"}});
    client.send({{"type", "control"}, {"action", "configure"}, {"sensor", "imu"}});
    CHECK(client.receive()["detail"] == "configured");
}

TEST_CASE("two clients get independent sessions") {
    LiveServer live("two");
    Client a("127.0.0.1", live.server->port());
    Client b("127.0.0.1", live.server->port());
    const std::vector<double> goals(40, 0.5);
    const auto ra = replay_remote(a, goals, 1, SensorKind::ideal);
    const auto rb = replay_remote(b, goals, 1, SensorKind::ideal);
    REQUIRE(ra.states.size() == rb.states.size());
    for (std::size_t i = 0; i < ra.states.size(); ++i) CHECK(ra.states[i]["phi"] == rb.states[i]["phi"]);
    CHECK(ra.session_end["log_path"] != rb.session_end["log_path"]);
}

TEST_CASE("stopping the server closes live sessions with a persisted log") {
    auto live = std::make_unique<LiveServer>("shutdown");
    Client client("127.0.0.1", live->server->port());
    client.send({{"type", "control"}, {"action", "start"}});
    client.receive_until("ack");
    client.receive_until("state");
    live->server->stop();
    const auto end = client.receive_until("session_end");
    CHECK(fs::exists(end["log_path"].get<std::string>()));
    live.reset();
}

TEST_CASE("unavailable address") {
    ServerOptions o;
    o.address = "not-an-address";
    CHECK_THROWS_AS(Server(std::move(o)), ConfigError);
}
