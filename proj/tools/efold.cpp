// efold: train, evaluate, serve and analyze end-effect-goal policies.
//
// Exit codes: 0 success, 1 usage, 2 configuration / unreadable input,
// 3 runtime failure.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "efold/config.hpp"
#include "efold/errors.hpp"
#include "efold/metrics.hpp"
#include "efold/rl/checkpoint.hpp"
#include "efold/rl/train.hpp"
#include "efold/teleop/client.hpp"
#include "efold/teleop/server.hpp"
#include "efold/trajectory_io.hpp"
#include "efold/workbench.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace efold;

namespace {

enum Exit { kOk = 0, kUsage = 1, kConfig = 2, kRuntime = 3 };

struct Common {
    std::string config_path;
    std::uint64_t seed = 0;
    std::string log_dir;
    std::vector<std::string> sets;
    std::string dump_config;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("-c,--config", c.config_path, "Workbench config file (JSON)")->check(CLI::ExistingFile);
    cmd->add_option("--seed", c.seed, "Random seed")->capture_default_str();
    cmd->add_option("--log-dir", c.log_dir, "Output root (overrides EFOLD_LOG_DIR and the config)");
    cmd->add_option("--set", c.sets, "Override a config value: section.key=value (repeatable)");
    cmd->add_option("--dump-config", c.dump_config, "Write the effective config to this path ('-' for stdout) and exit");
}

// "plant.fingers=4" -> {"plant":{"fingers":4}}. Values that do not parse as
// JSON are taken as strings.
json parse_override(const std::string& item) {
    const auto eq = item.find('=');
    const auto dot = item.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
        throw UsageError("--set expects section.key=value, got '" + item + "'");
    const std::string section = item.substr(0, dot);
    const std::string key = item.substr(dot + 1, eq - dot - 1);
    const std::string raw = item.substr(eq + 1);
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;
    return json{{section, {{key, value}}}};
}

WorkbenchConfig base_config(const Common& c) {
    WorkbenchConfig cfg = c.config_path.empty() ? WorkbenchConfig{} : load_workbench_config(c.config_path);
    for (const auto& s : c.sets) cfg = workbench_config_from_json(parse_override(s), cfg);
    return cfg;
}

fs::path log_root(const Common& c, const WorkbenchConfig& cfg) {
    if (!c.log_dir.empty()) return c.log_dir;
    if (const char* env = std::getenv("EFOLD_LOG_DIR"); env && *env) return env;
    return cfg.logging.directory;
}

// Returns true when the command should stop after dumping.
bool maybe_dump(const Common& c, WorkbenchConfig cfg) {
    if (c.dump_config.empty()) return false;
    cfg.validate();
    if (c.dump_config == "-") {
        std::cout << to_json(cfg).dump(2) << "\n";
    } else {
        save_workbench_config(cfg, c.dump_config);
    }
    return true;
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeFault("cannot write " + path.string());
    out << text;
    if (!out) throw RuntimeFault("write failed: " + path.string());
}

metrics::ReportFormat report_format(const std::string& name) {
    return name == "json" ? metrics::ReportFormat::json : metrics::ReportFormat::csv;
}

std::string num(double v) {
    if (!std::isfinite(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
    Common common;
    std::string out;
    std::string reward;
    std::optional<int> epochs;
    std::optional<int> hidden_width;
    int runs = 1;
    bool quiet = false;
};

int cmd_train(const TrainArgs& a) {
    WorkbenchConfig cfg = base_config(a.common);
    if (!a.reward.empty()) cfg.reward = RewardConfig::for_kind(reward_kind_from_string(a.reward));
    if (a.epochs) cfg.training.epochs = *a.epochs;
    if (a.hidden_width) cfg.training.hidden_width = *a.hidden_width;
    cfg.validate();
    if (maybe_dump(a.common, cfg)) return kOk;
    if (a.runs < 1) throw UsageError("--runs must be at least 1");

    const fs::path out = a.out.empty() ? log_root(a.common, cfg) / "train" : fs::path(a.out);
    for (int r = 0; r < a.runs; ++r) {
        const std::uint64_t run_seed = r == 0 ? a.common.seed : derive_seed(a.common.seed, static_cast<std::uint64_t>(r));
        const fs::path dir = out / ("run-" + std::to_string(r));
        fs::create_directories(dir);
        std::ofstream curve(dir / "success.csv");
        if (!curve) throw RuntimeFault("cannot write " + (dir / "success.csv").string());
        curve << "epoch,success_rate\n";
        auto result = rl::train(cfg.plant, cfg.reward, cfg.training, run_seed, [&](const rl::EpochRecord& e) {
            curve << e.epoch << ',' << num(e.success_rate) << '\n';
            curve.flush();
            if (!a.quiet)
                std::fprintf(stderr, "run %d epoch %d success %.2f critic %.4f (%.1f s)\n", r, e.epoch,
                             e.success_rate, e.critic_loss, e.seconds);
        });
        result.checkpoint.run_index = r;
        rl::save_checkpoint(result.checkpoint, dir / "checkpoint.json");
        json manifest{{"run_index", r},
                      {"seed", a.common.seed},
                      {"run_seed", run_seed},
                      {"epochs", cfg.training.epochs},
                      {"final_success_rate", result.log.empty() ? json(nullptr) : json(result.log.back().success_rate)},
                      {"checkpoint", "checkpoint.json"},
                      {"success_log", "success.csv"},
                      {"config", to_json(cfg)}};
        write_text(dir / "manifest.json", manifest.dump(2) + "\n");
        std::cout << dir.string() << "\n";
    }
    return kOk;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
    Common common;
    std::string checkpoint;
    std::string goal = "sine";
    double alpha = 0.5;
    double omega = 0.05;
    double magnitude = 1.0;
    int onset = 50;
    std::optional<int> steps;
    int repeats = 1;
    std::string sensor;
    std::string out;
    std::string format = "csv";
};

void write_runs(const fs::path& dir, const std::vector<EpisodeLog>& logs, const ScriptedEval& eval,
                const std::string& reward) {
    fs::create_directories(dir);
    for (std::size_t r = 0; r < logs.size(); ++r) {
        char name[32];
        std::snprintf(name, sizeof name, "rep-%03zu.csv", r);
        write_trajectory(dir / name, logs[r], scripted_header(eval, reward, static_cast<int>(r)));
    }
}

int cmd_eval(const EvalArgs& a) {
    WorkbenchConfig cfg = base_config(a.common);
    if (!a.sensor.empty()) cfg.sensor.kind = sensor_kind_from_string(a.sensor);
    cfg.validate();
    if (maybe_dump(a.common, cfg)) return kOk;

    const auto ckpt = rl::load_checkpoint(a.checkpoint);
    const std::string reward(to_string(ckpt.reward.kind));
    const fs::path out = a.out.empty() ? log_root(a.common, cfg) / "eval" : fs::path(a.out);
    const auto fmt = report_format(a.format);
    const std::string ext = a.format == "json" ? ".json" : ".csv";

    ScriptedEval eval;
    eval.repeats = a.repeats;
    eval.sensor = cfg.sensor;
    eval.seed = a.common.seed;

    std::string report;
    if (a.goal == "step") {
        eval.goal = GoalSource::step(a.magnitude, a.onset);
        eval.steps = a.steps.value_or(250);
        const auto logs = run_scripted(ckpt, eval);
        write_runs(out / "step", logs, eval, reward);
        const std::vector<metrics::StepRow> rows{step_row(logs, reward, eval.goal.step_params)};
        metrics::emit_report(rows, out / ("report" + ext), fmt);
        report = metrics::format_report(rows, fmt);
    } else {
        std::vector<std::pair<double, double>> grid;
        if (a.goal == "grid") {
            grid = {{0.5, 0.1}, {0.5, 0.05}, {1.0, 0.1}, {1.0, 0.05}};
        } else {
            grid = {{a.alpha, a.omega}};
        }
        eval.steps = a.steps.value_or(400);
        std::vector<metrics::SineReport> rows;
        for (const auto& [alpha, omega] : grid) {
            eval.goal = GoalSource::sinusoid(alpha, omega);
            const auto logs = run_scripted(ckpt, eval);
            write_runs(out / ("sine-a" + num(alpha) + "-w" + num(omega)), logs, eval, reward);
            rows.push_back(sine_row(logs, reward, alpha, omega));
        }
        metrics::emit_report(rows, out / ("report" + ext), fmt);
        report = metrics::format_report(rows, fmt);
    }
    std::cout << report;
    return kOk;
}

// ---------------------------------------------------------------- serve

struct ServeArgs {
    Common common;
    std::string checkpoint;
    std::string host;
    std::optional<int> port;
    std::string sensor;
};

int cmd_serve(const ServeArgs& a) {
    WorkbenchConfig cfg = base_config(a.common);
    if (!a.host.empty()) cfg.service.bind_address = a.host;
    if (a.port) cfg.service.port = *a.port;
    if (!a.sensor.empty()) cfg.sensor.kind = sensor_kind_from_string(a.sensor);
    cfg.validate();
    if (maybe_dump(a.common, cfg)) return kOk;

    // Fail fast on a bad checkpoint before binding the port.
    auto initial = std::make_shared<const rl::PolicyCheckpoint>(rl::load_checkpoint(a.checkpoint));

    auto cache = std::make_shared<std::map<std::string, std::shared_ptr<const rl::PolicyCheckpoint>>>();
    (*cache)[a.checkpoint] = initial;
    teleop::ServerOptions opts;
    opts.address = cfg.service.bind_address;
    opts.port = static_cast<unsigned short>(cfg.service.port);
    opts.session.reward = cfg.reward;
    opts.session.sensor = cfg.sensor;
    opts.session.pong = cfg.pong;
    opts.session.log_dir = log_root(a.common, cfg) / "sessions";
    opts.session.default_checkpoint = a.checkpoint;
    opts.session.resolve = [cache](const std::string& name) {
        auto& slot = (*cache)[name];
        if (!slot) slot = std::make_shared<const rl::PolicyCheckpoint>(rl::load_checkpoint(name));
        return slot;
    };
    opts.log = [](const std::string& line) { std::fprintf(stderr, "efold serve: %s\n", line.c_str()); };

    teleop::Server server(std::move(opts));
    std::printf("efold serve: listening on ws://%s:%u (logs in %s)\n", cfg.service.bind_address.c_str(),
                static_cast<unsigned>(server.port()), (log_root(a.common, cfg) / "sessions").string().c_str());
    std::fflush(stdout);
    server.run(true);
    std::printf("efold serve: stopped\n");
    return kOk;
}

// ---------------------------------------------------------------- metrics

struct MetricsArgs {
    Common common;
    std::vector<std::string> paths;
    std::string format = "csv";
    std::string out;
};

std::vector<fs::path> expand(const std::vector<std::string>& inputs) {
    std::vector<fs::path> files;
    for (const auto& in : inputs) {
        if (fs::is_directory(in)) {
            std::vector<fs::path> found;
            for (const auto& e : fs::recursive_directory_iterator(in))
                if (e.is_regular_file() && e.path().extension() == ".csv" && e.path().filename() != "report.csv" &&
                    e.path().filename() != "success.csv")
                    found.push_back(e.path());
            std::sort(found.begin(), found.end());
            files.insert(files.end(), found.begin(), found.end());
        } else {
            files.emplace_back(in);
        }
    }
    return files;
}

std::string header_value(const TrajectoryFile& f, const std::string& key, const std::string& fallback = {}) {
    auto it = f.header.find(key);
    return it == f.header.end() ? fallback : it->second;
}

int cmd_metrics(const MetricsArgs& a) {
    WorkbenchConfig cfg = base_config(a.common);
    cfg.validate();
    if (maybe_dump(a.common, cfg)) return kOk;

    const auto files = expand(a.paths);
    if (files.empty()) throw UsageError("metrics: no trajectory files given");

    int failures = 0;
    json per_file = json::array();
    // Scripted runs are regrouped exactly as `eval` grouped them.
    std::map<std::string, std::vector<EpisodeLog>> sine_groups, step_groups;
    std::map<std::string, std::map<std::string, std::string>> group_meta;

    for (const auto& path : files) {
        TrajectoryFile f;
        try {
            f = read_trajectory(path);
        } catch (const std::exception& e) {
            std::fprintf(stderr, "efold metrics: %s: %s\n", path.string().c_str(), e.what());
            ++failures;
            continue;
        }
        json row{{"file", path.string()}, {"steps", f.log.steps.size()}, {"dropped", f.log.dropped()}};
        if (!f.log.steps.empty()) {
            const auto rec = metrics::TrajectoryRecord::from_log(f.log);
            row["mse_rad2"] = metrics::mse(rec);
            row["sat_pct"] = metrics::saturation(rec);
            row["energy"] = metrics::energy(rec);
            row["energy_per_step"] = metrics::energy(rec) / static_cast<double>(rec.size());
            const auto [lo, hi] = std::minmax_element(rec.goal.begin(), rec.goal.end());
            row["latency_steps"] =
                rec.size() >= metrics::kMinLatencySamples && *hi > *lo ? json(metrics::latency(rec)) : json(nullptr);
        }
        if (auto h = header_value(f, "hits"); !h.empty()) row["hits"] = std::stoi(h);
        if (auto h = header_value(f, "failures"); !h.empty()) row["failures"] = std::stoi(h);
        per_file.push_back(row);

        const std::string goal = header_value(f, "goal");
        const std::string reward = header_value(f, "reward", "unknown");
        if (goal == "sine") {
            const std::string key = reward + "|" + header_value(f, "alpha") + "|" + header_value(f, "omega");
            sine_groups[key].push_back(std::move(f.log));
            group_meta[key] = f.header;
        } else if (goal == "step") {
            const std::string key = reward + "|" + header_value(f, "magnitude") + "|" + header_value(f, "onset");
            step_groups[key].push_back(std::move(f.log));
            group_meta[key] = f.header;
        }
    }

    const auto fmt = report_format(a.format);
    std::vector<metrics::SineReport> sine_rows;
    for (const auto& [key, logs] : sine_groups) {
        const auto& m = group_meta[key];
        sine_rows.push_back(sine_row(logs, m.at("reward"), std::stod(m.at("alpha")), std::stod(m.at("omega"))));
    }
    std::vector<metrics::StepRow> step_rows;
    for (const auto& [key, logs] : step_groups) {
        const auto& m = group_meta[key];
        StepGoalParams p{std::stod(m.at("magnitude")), std::stoi(m.at("onset"))};
        step_rows.push_back(step_row(logs, m.at("reward"), p));
    }

    std::string text;
    if (fmt == metrics::ReportFormat::json) {
        json doc{{"files", per_file}};
        if (!sine_rows.empty()) doc["sine"] = json::parse(metrics::format_report(sine_rows, fmt));
        if (!step_rows.empty()) doc["step"] = json::parse(metrics::format_report(step_rows, fmt));
        text = doc.dump(2) + "\n";
    } else {
        text = "file,steps,mse_rad2,latency_steps,sat_pct,energy,energy_per_step,dropped,hits,failures\n";
        auto field = [](const json& row, const char* k) {
            return row.contains(k) && !row[k].is_null() ? num(row[k].get<double>()) : std::string{};
        };
        for (const auto& row : per_file) {
            text += row["file"].get<std::string>() + "," + std::to_string(row["steps"].get<std::size_t>()) + "," +
                    field(row, "mse_rad2") + "," + field(row, "latency_steps") + "," + field(row, "sat_pct") + "," +
                    field(row, "energy") + "," + field(row, "energy_per_step") + "," +
                    (row["dropped"].get<bool>() ? "1" : "0") + "," +
                    (row.contains("hits") ? std::to_string(row["hits"].get<int>()) : "") + "," +
                    (row.contains("failures") ? std::to_string(row["failures"].get<int>()) : "") + "\n";
        }
        if (!sine_rows.empty()) text += "\n" + metrics::format_report(sine_rows, fmt);
        if (!step_rows.empty()) text += "\n" + metrics::format_report(step_rows, fmt);
    }
    if (a.out.empty()) {
        std::cout << text;
    } else {
        write_text(a.out, text);
    }
    return failures > 0 ? kConfig : kOk;
}

// ---------------------------------------------------------------- replay

struct ReplayArgs {
    Common common;
    std::string checkpoint;
    std::string goals;
    std::string sensor;
    std::string out;
    std::string server;  // host:port of a running `efold serve`
};

int cmd_replay(const ReplayArgs& a) {
    WorkbenchConfig cfg = base_config(a.common);
    if (!a.sensor.empty()) cfg.sensor.kind = sensor_kind_from_string(a.sensor);
    cfg.validate();
    if (maybe_dump(a.common, cfg)) return kOk;

    const auto goals = read_goal_sequence(a.goals);
    EpisodeLog log;
    std::map<std::string, std::string> header{{"source", "replay"},
                                              {"goals", a.goals},
                                              {"sensor", std::string(to_string(cfg.sensor.kind))},
                                              {"seed", std::to_string(a.common.seed)}};
    if (a.server.empty()) {
        const auto ckpt = rl::load_checkpoint(a.checkpoint);
        log = replay_goals(ckpt, goals, cfg.sensor, a.common.seed);
    } else {
        const auto colon = a.server.rfind(':');
        if (colon == std::string::npos) throw UsageError("--server expects host:port");
        const std::string host = a.server.substr(0, colon);
        const int port = std::stoi(a.server.substr(colon + 1));
        teleop::Client client(host, static_cast<unsigned short>(port));
        const std::string ckpt_ref = a.checkpoint.empty() ? std::string{} : fs::absolute(a.checkpoint).string();
        const auto remote = teleop::replay_remote(client, goals, a.common.seed, cfg.sensor.kind, ckpt_ref);
        client.close();
        log = read_trajectory(remote.session_end.at("log_path").get<std::string>()).log;
        header["source"] = "replay-remote";
        header["server"] = a.server;
    }

    const fs::path out = a.out.empty() ? log_root(a.common, cfg) / "replay" / "replay.csv" : fs::path(a.out);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    write_trajectory(out, log, header);
    std::printf("%s\n", out.string().c_str());
    if (!log.steps.empty()) {
        const auto rec = metrics::TrajectoryRecord::from_log(log);
        std::printf("steps %zu mse_rad2 %s sat_pct %s dropped %d\n", rec.size(), num(metrics::mse(rec)).c_str(),
                    num(metrics::saturation(rec)).c_str(), log.dropped() ? 1 : 0);
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"efold: end-effect goal telemanipulation workbench"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "efold 0.1.0");

    TrainArgs train;
    auto* c_train = app.add_subcommand("train", "Train DDPG+HER policies on random goals");
    add_common(c_train, train.common);
    c_train->add_option("-o,--out", train.out, "Output directory (default <log-dir>/train)");
    c_train->add_option("--reward", train.reward, "sparse or dense")->check(CLI::IsMember({"sparse", "dense"}));
    c_train->add_option("--epochs", train.epochs, "Training epochs");
    c_train->add_option("--hidden-width", train.hidden_width, "Hidden layer width");
    c_train->add_option("--runs", train.runs, "Independent runs with derived seeds")->capture_default_str();
    c_train->add_flag("-q,--quiet", train.quiet, "No per-epoch progress on stderr");

    EvalArgs eval;
    auto* c_eval = app.add_subcommand("eval", "Track scripted sinusoid or step goals and report metrics");
    add_common(c_eval, eval.common);
    c_eval->add_option("--checkpoint", eval.checkpoint, "Checkpoint file")->required();
    c_eval->add_option("--goal", eval.goal, "sine, step or grid")
        ->check(CLI::IsMember({"sine", "step", "grid"}))
        ->capture_default_str();
    c_eval->add_option("--alpha", eval.alpha, "Sinusoid amplitude (rad)")->capture_default_str();
    c_eval->add_option("--omega", eval.omega, "Sinusoid frequency (rad/step)")->capture_default_str();
    c_eval->add_option("--magnitude", eval.magnitude, "Step size (rad)")->capture_default_str();
    c_eval->add_option("--onset", eval.onset, "Step onset (steps)")->capture_default_str();
    c_eval->add_option("--steps", eval.steps, "Episode length (default 400 sine, 250 step)");
    c_eval->add_option("--repeats", eval.repeats, "Repeats per row")->capture_default_str();
    c_eval->add_option("--sensor", eval.sensor, "ideal, imu or camera")
        ->check(CLI::IsMember({"ideal", "imu", "camera"}));
    c_eval->add_option("-o,--out", eval.out, "Output directory (default <log-dir>/eval)");
    c_eval->add_option("--format", eval.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

    ServeArgs serve;
    auto* c_serve = app.add_subcommand("serve", "Host the teleop websocket service");
    add_common(c_serve, serve.common);
    c_serve->add_option("--checkpoint", serve.checkpoint, "Default checkpoint file")->required();
    c_serve->add_option("--host", serve.host, "Bind address");
    c_serve->add_option("--port", serve.port, "Port (0 for any free port)");
    c_serve->add_option("--sensor", serve.sensor, "Default sensor model")
        ->check(CLI::IsMember({"ideal", "imu", "camera"}));

    MetricsArgs met;
    auto* c_metrics = app.add_subcommand("metrics", "Recompute metrics from trajectory files or directories");
    add_common(c_metrics, met.common);
    c_metrics->add_option("paths", met.paths, "Trajectory files or directories");
    c_metrics->add_option("--format", met.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    c_metrics->add_option("-o,--out", met.out, "Write the report here instead of stdout");

    ReplayArgs rep;
    auto* c_replay = app.add_subcommand("replay", "Run a goal file through a checkpoint headlessly");
    add_common(c_replay, rep.common);
    c_replay->add_option("--checkpoint", rep.checkpoint, "Checkpoint file");
    c_replay->add_option("--goals", rep.goals, "Goal file (trajectory or step,goal CSV)")->required();
    c_replay->add_option("--sensor", rep.sensor, "ideal, imu or camera")
        ->check(CLI::IsMember({"ideal", "imu", "camera"}));
    c_replay->add_option("-o,--out", rep.out, "Output trajectory (default <log-dir>/replay/replay.csv)");
    c_replay->add_option("--server", rep.server, "Replay through a running `efold serve` at host:port");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*c_train) return cmd_train(train);
        if (*c_eval) return cmd_eval(eval);
        if (*c_serve) return cmd_serve(serve);
        if (*c_metrics) return cmd_metrics(met);
        if (*c_replay) {
            if (rep.checkpoint.empty() && rep.server.empty())
                throw UsageError("replay needs --checkpoint (or --server to use the server's default)");
            return cmd_replay(rep);
        }
    } catch (const UsageError& e) {
        std::fprintf(stderr, "efold: %s\n", e.what());
        return kUsage;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "efold: config error: %s\n", e.what());
        return kConfig;
    } catch (const LoadError& e) {
        std::fprintf(stderr, "efold: %s\n", e.what());
        return kConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "efold: %s\n", e.what());
        return kRuntime;
    }
    return kUsage;
}
