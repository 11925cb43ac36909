#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "efold/errors.hpp"
#include "efold/trajectory_io.hpp"

using namespace efold;
namespace fs = std::filesystem;

namespace {

fs::path tmp(const std::string& name) {
    const fs::path dir = fs::path(EFOLD_TEST_TMP) / "trajectory_io";
    fs::create_directories(dir);
    return dir / name;
}

EpisodeLog random_log(int n, bool drop) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    EpisodeLog log;
    log.fingers = 2;
    log.dt = 0.04;
    for (int i = 0; i < n; ++i) {
        StepRecord s{i, u(rng), u(rng), u(rng), {u(rng) / 3, u(rng) / 3, 1.0 / 3.0, -1e-300}, u(rng),
                     drop && i == n - 1};
        log.append(s);
    }
    return log;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream(p, std::ios::trunc) << text;
}

bool same(const EpisodeLog& a, const EpisodeLog& b) {
    if (a.dt != b.dt || a.fingers != b.fingers || a.steps.size() != b.steps.size()) return false;
    for (std::size_t i = 0; i < a.steps.size(); ++i) {
        const auto &x = a.steps[i], &y = b.steps[i];
        if (x.step != y.step || x.phi != y.phi || x.goal != y.goal || x.goal_sensed != y.goal_sensed ||
            x.action != y.action || x.reward != y.reward || x.dropped != y.dropped)
            return false;
    }
    return true;
}

}  // namespace

TEST_CASE("round trip is exact and keeps the header") {
    const auto log = random_log(50, true);
    const auto p = tmp("rt.csv");
    write_trajectory(p, log, {{"source", "eval"}, {"seed", "7"}});
    const auto f = read_trajectory(p);
    CHECK(same(f.log, log));
    CHECK(f.log.dropped());
    CHECK(f.header.at("source") == "eval");
    CHECK(f.header.at("seed") == "7");
    CHECK(f.header.at("fingers") == "2");

    const auto goals = read_goal_sequence(p);
    REQUIRE(goals.size() == 50);
    for (std::size_t i = 0; i < goals.size(); ++i) CHECK(goals[i] == log.steps[i].goal);
}

TEST_CASE("plain goal csv") {
    const auto p = tmp("goals.csv");
    write_text(p, "# hand written\nstep,goal\n0,0.5\n1,-0.25\n2,3\n");
    CHECK(read_goal_sequence(p) == std::vector<double>{0.5, -0.25, 3.0});
    write_text(p, "0,0.5\n1,abc\n");
    CHECK_THROWS_AS(read_goal_sequence(p), LoadError);
    CHECK_THROWS_AS(read_goal_sequence(tmp("missing.csv")), LoadError);
}

TEST_CASE("malformed files are load errors") {
    const auto p = tmp("bad.csv");
    write_trajectory(p, random_log(5, false));
    std::ifstream in(p);
    std::string text((std::istreambuf_iterator<char>(in)), {});
    in.close();

    SUBCASE("truncated row") {
        write_text(p, text.substr(0, text.size() - 20));
        CHECK_THROWS_AS(read_trajectory(p), LoadError);
    }
    SUBCASE("non-numeric field") {
        auto t = text;
        t.replace(t.rfind('\n', t.size() - 2) + 1, 1, "x");
        write_text(p, t);
        CHECK_THROWS_AS(read_trajectory(p), LoadError);
    }
    SUBCASE("wrong format tag") {
        auto t = text;
        t.replace(t.find("format=") + 7, 1, "Z");
        write_text(p, t);
        CHECK_THROWS_AS(read_trajectory(p), LoadError);
    }
    SUBCASE("missing file") { CHECK_THROWS_AS(read_trajectory(tmp("nope.csv")), LoadError); }
    SUBCASE("empty") {
        write_text(p, "");
        CHECK_THROWS_AS(read_trajectory(p), LoadError);
    }
}
