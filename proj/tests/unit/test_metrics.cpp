#include <doctest.h>

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <random>

#include "efold/errors.hpp"
#include "efold/goals.hpp"
#include "efold/metrics.hpp"

using namespace efold;
using namespace efold::metrics;

namespace {

TrajectoryRecord series(std::vector<double> goal, std::vector<double> actual) {
    TrajectoryRecord r;
    r.goal = std::move(goal);
    r.actual = std::move(actual);
    r.actions = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(r.goal.size()), 2);
    return r;
}

TrajectoryRecord delayed_sine(int n, double alpha, double omega, double delay) {
    std::vector<double> g, a;
    for (int i = 0; i < n; ++i) {
        g.push_back(alpha * std::sin(omega * i));
        a.push_back(alpha * std::sin(omega * (i - delay)));
    }
    return series(g, a);
}

TrajectoryRecord step_response(int n, int onset, const std::function<double(double)>& y) {
    std::vector<double> g, a;
    for (int i = 0; i < n; ++i) {
        g.push_back(i < onset ? 0.0 : 1.0);
        a.push_back(i < onset ? 0.0 : y(i - onset));
    }
    return series(g, a);
}

}  // namespace

TEST_CASE("mse closed forms") {
    std::vector<double> g(500), a(500);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
        g[i] = u(rng);
        a[i] = g[i] + 0.1;
    }
    CHECK(mse(series(g, a)) == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(mse(series(g, g)) == 0.0);

    // Whole turns do not count.
    auto b = a;
    for (std::size_t i = 0; i < b.size(); ++i) b[i] += 2.0 * kPi * static_cast<double>(i % 3);
    CHECK(mse(series(g, b)) == doctest::Approx(0.01).epsilon(1e-9));
    // Across the seam: 3.1 vs -3.1 is 0.0832 rad apart.
    CHECK(mse(series({3.1}, {-3.1})) == doctest::Approx(std::pow(2 * kPi - 6.2, 2)));

    CHECK_THROWS_AS(mse(series({}, {})), UsageError);
    CHECK_THROWS_AS(mse(series({1.0, 2.0}, {1.0})), UsageError);
}

TEST_CASE("latency recovers pure delays") {
    for (double omega : {0.05, 0.1}) {
        for (int d = 1; d <= 10; ++d) {
            CAPTURE(omega);
            CAPTURE(d);
            const double l = latency(delayed_sine(2000, 0.5, omega, d));
            CHECK(std::abs(l + d) <= 0.25);
        }
        // A lead reads positive.
        CHECK(latency(delayed_sine(2000, 0.5, omega, -3)) == doctest::Approx(3.0).epsilon(0.1));
        CHECK(std::abs(latency(delayed_sine(2000, 0.5, omega, 0))) < 1e-9);
    }
}

TEST_CASE("latency uses the generated goal stream") {
    std::vector<double> g, a;
    for (int i = 0; i < 1000; ++i) {
        g.push_back(sinusoid_goal(0.5, 0.05, i).yaw.value());
        a.push_back(i >= 4 ? sinusoid_goal(0.5, 0.05, i - 4).yaw.value() : 0.0);
    }
    CHECK(std::abs(latency(series(g, a)) + 4.0) <= 0.5);
}

TEST_CASE("latency preconditions") {
    CHECK_THROWS_AS(latency(series(std::vector<double>(100, 0.3), std::vector<double>(100, 0.1))), UsageError);
    CHECK_THROWS_AS(latency(delayed_sine(kMinLatencySamples - 1, 0.5, 0.1, 1)), UsageError);
    CHECK_NOTHROW(latency(delayed_sine(kMinLatencySamples, 0.5, 0.1, 1)));
}

TEST_CASE("saturation and energy") {
    TrajectoryRecord r = series(std::vector<double>(4, 0.0), std::vector<double>(4, 0.0));
    r.actions.resize(4, 2);
    r.actions << 1.0, 0.2,   //
        -1.0, 0.0,           //
        0.99, -0.5,          //
        -0.989, 1.0;
    // |a| >= 0.99: 1.0, -1.0, 0.99, 1.0
    CHECK(saturation(r) == doctest::Approx(50.0));
    CHECK(saturation(r, 1.0) == doctest::Approx(37.5));
    CHECK(saturation(r, 0.0) == doctest::Approx(100.0));
    CHECK(energy(r) == doctest::Approx(1.0 + 0.2 + 1.0 + 0.0 + 0.99 + 0.5 + 0.989 + 1.0));

    // Half of a 100 x 10 matrix saturated.
    TrajectoryRecord h = r;
    h.actions = Eigen::MatrixXd::Constant(100, 10, 0.3);
    h.actions.leftCols(5).setConstant(-1.0);
    CHECK(saturation(h) == 50.0);
    CHECK(energy(h) == doctest::Approx(100 * 5 * 1.0 + 100 * 5 * 0.3));

    // Energy is additive over time blocks.
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::MatrixXd big(60, 8);
    for (Eigen::Index i = 0; i < big.size(); ++i) big(i) = u(rng);
    TrajectoryRecord whole = r, top = r, bottom = r;
    whole.actions = big;
    top.actions = big.topRows(25);
    bottom.actions = big.bottomRows(35);
    CHECK(energy(whole) == doctest::Approx(energy(top) + energy(bottom)).epsilon(1e-12));

    TrajectoryRecord empty;
    CHECK_THROWS_AS(energy(empty), UsageError);
    CHECK_THROWS_AS(saturation(empty), UsageError);
}

TEST_CASE("first-order step response") {
    for (double tau : {5.0, 10.0, 17.3}) {
        CAPTURE(tau);
        const auto r = step_response(400, 50, [tau](double t) { return 1.0 - std::exp(-t / tau); });
        const auto s = step_metrics(r);
        CHECK(s.settled);
        CHECK(std::abs(s.settling_time - tau * std::log(20.0)) <= 1.0);
        CHECK(s.overshoot <= 0.0);
        CHECK(std::abs(s.steady_state_error) < 0.1);
    }
}

TEST_CASE("second-order step response") {
    const double zeta = 0.5, wn = 0.1;
    const double wd = wn * std::sqrt(1 - zeta * zeta);
    const auto y = [&](double t) {
        return 1.0 - std::exp(-zeta * wn * t) * (std::cos(wd * t) + zeta / std::sqrt(1 - zeta * zeta) * std::sin(wd * t));
    };
    const auto s = step_metrics(step_response(600, 50, y));
    CHECK(std::abs(s.overshoot - 16.3) <= 0.5);
    CHECK(std::abs(s.peak_time - kPi / wd) <= 1.0);
    CHECK(s.settled);
    CHECK(std::abs(s.steady_state_error) < 0.1);

    // Negative steps mirror.
    std::vector<double> g, a;
    for (int i = 0; i < 600; ++i) {
        g.push_back(i < 50 ? 0.0 : -1.0);
        a.push_back(i < 50 ? 0.0 : -y(i - 50));
    }
    const auto m = step_metrics(series(g, a), {-1.0, 50, 0.05, 20});
    CHECK(m.overshoot == doctest::Approx(s.overshoot));
    CHECK(m.settling_time == s.settling_time);
}

TEST_CASE("steady-state error and unsettled runs") {
    const auto biased = step_metrics(step_response(300, 50, [](double) { return 0.9; }));
    CHECK(biased.steady_state_error == doctest::Approx(-10.0));
    CHECK_FALSE(biased.settled);
    CHECK(std::isnan(biased.settling_time));

    const auto instant = step_metrics(step_response(300, 50, [](double) { return 1.0; }));
    CHECK(instant.settled);
    CHECK(instant.settling_time == 0.0);

    CHECK_THROWS_AS(step_metrics(step_response(60, 50, [](double) { return 1.0; })), UsageError);
    CHECK_THROWS_AS(step_metrics(step_response(300, 50, [](double) { return 1.0; }), {0.0, 50, 0.05, 20}),
                    UsageError);
}

TEST_CASE("report aggregation") {
    std::vector<TrajectoryRecord> runs{delayed_sine(400, 0.5, 0.05, 2), delayed_sine(400, 0.5, 0.05, 4)};
    for (auto& r : runs) r.actions = Eigen::MatrixXd::Constant(400, 10, 0.5);
    runs.push_back(delayed_sine(30, 0.5, 0.05, 2));  // too short to time
    runs.back().actions = Eigen::MatrixXd::Constant(30, 10, 0.5);
    const auto rep = sine_report(runs, "dense", 0.5, 0.05, 1);
    CHECK(rep.repeats == 3);
    CHECK(rep.drops == 1);
    CHECK(rep.latency == doctest::Approx((latency(runs[0]) + latency(runs[1])) / 2));
    CHECK(rep.mse == doctest::Approx((mse(runs[0]) + mse(runs[1]) + mse(runs[2])) / 3));
    CHECK(rep.energy_per_step == doctest::Approx(5.0));
    CHECK_THROWS_AS(sine_report({}, "dense", 0.5, 0.05), UsageError);

    const auto csv = format_report(std::vector<SineReport>{rep}, ReportFormat::csv);
    CHECK(csv.rfind("reward,alpha,omega,mse_rad2,latency_steps,sat_pct,energy,energy_per_step,repeats,drops\n", 0) == 0);
    const auto js = nlohmann::json::parse(format_report(std::vector<SineReport>{rep}, ReportFormat::json));
    CHECK(js["table"] == "sinusoid");
    CHECK(js["rows"][0]["repeats"] == 3);

    std::vector<TrajectoryRecord> steps{step_response(300, 50, [](double t) { return 1.0 - std::exp(-t / 10); }),
                                        step_response(300, 50, [](double) { return 0.5; })};
    const auto row = step_row(steps, "sparse", {});
    CHECK(row.unsettled == 1);
    CHECK(row.report.settling_time == step_metrics(steps[0]).settling_time);
    const auto sj = nlohmann::json::parse(format_report(std::vector<StepRow>{row}, ReportFormat::json));
    CHECK(sj["rows"][0]["unsettled"] == 1);
    CHECK_THROWS_AS(format_report(std::vector<StepRow>{}, ReportFormat::csv), UsageError);
}

TEST_CASE("record from an episode log") {
    EpisodeLog log;
    log.fingers = 1;
    log.steps.push_back({0, 0.1, 0.2, 0.2, {0.5, -1.0}, -0.1, false});
    log.steps.push_back({1, 0.15, 0.2, 0.2, {0.0, 1.0}, -0.05, false});
    const auto r = TrajectoryRecord::from_log(log);
    CHECK(r.goal == std::vector<double>{0.2, 0.2});
    CHECK(r.actual == std::vector<double>{0.1, 0.15});
    CHECK(r.actions(1, 1) == 1.0);
    CHECK(saturation(r) == 50.0);
}
