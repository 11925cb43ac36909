#include <doctest.h>

#include <filesystem>

#include "efold/config.hpp"
#include "efold/errors.hpp"

using namespace efold;
using nlohmann::json;

TEST_CASE("defaults round trip through json") {
    const WorkbenchConfig c;
    CHECK(workbench_config_from_json(to_json(c)) == c);
    CHECK_NOTHROW(c.validate());
}

TEST_CASE("partial sections keep defaults") {
    const auto c = workbench_config_from_json(json::parse(R"({"plant":{"travel":0.9},"reward":{"kind":"sparse"}})"));
    CHECK(c.plant.travel == 0.9);
    CHECK(c.plant.fingers == PlantConfig{}.fingers);
    CHECK(c.reward.kind == RewardKind::sparse);
    CHECK(c.training == rl::TrainConfig{});
}

TEST_CASE("modified config survives a file round trip") {
    WorkbenchConfig c;
    c.plant.damping = 0.123456789012345;
    c.training.hidden_width = 32;
    c.training.gamma = 0.97;
    c.sensor.kind = SensorKind::camera;
    c.pong.ball_speed = 0.8;
    c.service.port = 9001;
    c.logging.directory = "/tmp/x y";
    const auto p = std::filesystem::path(EFOLD_TEST_TMP) / "config_rt.json";
    std::filesystem::create_directories(p.parent_path());
    save_workbench_config(c, p);
    CHECK(load_workbench_config(p) == c);
}

TEST_CASE("bad configs are config errors") {
    CHECK_THROWS_AS(workbench_config_from_json(json::parse(R"({"plant":{"travell":1}})")), ConfigError);
    CHECK_THROWS_AS(workbench_config_from_json(json::parse(R"({"nonsense":{}})")), ConfigError);
    CHECK_THROWS_AS(workbench_config_from_json(json::parse(R"({"plant":3})")), ConfigError);
    CHECK_THROWS_AS(workbench_config_from_json(json::parse(R"({"plant":{"dt":"fast"}})")), ConfigError);
    CHECK_THROWS_AS(workbench_config_from_json(json::parse(R"({"reward":{"kind":"medium"}})")), ConfigError);
    CHECK_THROWS_AS(workbench_config_from_json(json::parse(R"({"sensor":{"kind":"sonar"}})")), ConfigError);
    CHECK_THROWS_AS(load_workbench_config("/nonexistent/efold.json"), ConfigError);

    WorkbenchConfig c;
    c.service.port = 70000;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}
