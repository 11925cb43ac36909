#include "efold/workbench.hpp"

#include <sstream>

#include "efold/errors.hpp"
#include "efold/rollout.hpp"

namespace efold {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::vector<EpisodeLog> run_scripted(const rl::PolicyCheckpoint& checkpoint, const ScriptedEval& eval) {
    eval.goal.validate();
    eval.sensor.validate();
    if (eval.steps <= 0) throw UsageError("scripted eval: steps must be positive");
    if (eval.repeats <= 0) throw UsageError("scripted eval: repeats must be positive");
    if (eval.goal.kind != GoalSource::Kind::sinusoid && eval.goal.kind != GoalSource::Kind::step)
        throw UsageError("scripted eval: goal must be a sinusoid or a step");

    const auto policy = checkpoint.policy();
    std::vector<EpisodeLog> logs;
    logs.reserve(static_cast<std::size_t>(eval.repeats));
    for (int r = 0; r < eval.repeats; ++r) {
        logs.push_back(run_episode(
            checkpoint.plant, checkpoint.reward, *policy, [&](int i) { return eval.goal.at(i); }, eval.steps,
            Angle(0.0), eval.sensor, derive_seed(eval.seed, static_cast<std::uint64_t>(r))));
    }
    return logs;
}

namespace {

std::vector<metrics::TrajectoryRecord> records(const std::vector<EpisodeLog>& logs, int& drops) {
    std::vector<metrics::TrajectoryRecord> out;
    drops = 0;
    for (const auto& log : logs) {
        drops += log.dropped() ? 1 : 0;
        out.push_back(metrics::TrajectoryRecord::from_log(log));
    }
    return out;
}

}  // namespace

metrics::SineReport sine_row(const std::vector<EpisodeLog>& logs, const std::string& reward, double alpha,
                             double omega) {
    int drops = 0;
    const auto recs = records(logs, drops);
    return metrics::sine_report(recs, reward, alpha, omega, drops);
}

metrics::StepRow step_row(const std::vector<EpisodeLog>& logs, const std::string& reward,
                          const StepGoalParams& params) {
    int drops = 0;
    const auto recs = records(logs, drops);
    metrics::StepOptions opts;
    opts.magnitude = params.magnitude;
    opts.onset = params.onset;
    return metrics::step_row(recs, reward, opts, drops);
}

EpisodeLog replay_goals(const rl::PolicyCheckpoint& checkpoint, const std::vector<double>& goals,
                        const SensorModel& sensor, std::uint64_t seed) {
    sensor.validate();
    const auto policy = checkpoint.policy();
    return run_episode(
        checkpoint.plant, checkpoint.reward, *policy,
        [&](int i) { return Goal(Angle(goals[static_cast<std::size_t>(i)])); }, static_cast<int>(goals.size()),
        Angle(0.0), sensor, seed);
}

std::map<std::string, std::string> scripted_header(const ScriptedEval& eval, const std::string& reward, int repeat) {
    auto num = [](double v) {
        std::ostringstream os;
        os.precision(17);
        os << v;
        return os.str();
    };
    std::map<std::string, std::string> h{
        {"reward", reward},
        {"sensor", std::string(to_string(eval.sensor.kind))},
        {"seed", std::to_string(eval.seed)},
        {"repeat", std::to_string(repeat)},
    };
    if (eval.goal.kind == GoalSource::Kind::sinusoid) {
        h["goal"] = "sine";
        h["alpha"] = num(eval.goal.alpha);
        h["omega"] = num(eval.goal.omega);
    } else {
        h["goal"] = "step";
        h["magnitude"] = num(eval.goal.step_params.magnitude);
        h["onset"] = std::to_string(eval.goal.step_params.onset);
    }
    return h;
}

}  // namespace efold
