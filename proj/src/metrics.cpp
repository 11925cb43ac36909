#include "efold/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>
#include <unsupported/Eigen/FFT>

#include "efold/errors.hpp"

namespace efold::metrics {

void TrajectoryRecord::validate() const {
    if (goal.size() != actual.size()) throw UsageError("trajectory: goal and actual series lengths differ");
    if (actions.rows() != 0 && static_cast<std::size_t>(actions.rows()) != goal.size()) {
        throw UsageError("trajectory: action rows do not match the series length");
    }
}

TrajectoryRecord TrajectoryRecord::from_log(const EpisodeLog& log) {
    TrajectoryRecord r;
    r.dt = log.dt;
    const auto n = static_cast<Eigen::Index>(log.steps.size());
    const auto m = static_cast<Eigen::Index>(action_size(log.fingers));
    r.actions.resize(n, m);
    for (Eigen::Index i = 0; i < n; ++i) {
        const StepRecord& s = log.steps[static_cast<std::size_t>(i)];
        r.goal.push_back(s.goal);
        r.actual.push_back(s.phi);
        if (static_cast<Eigen::Index>(s.action.size()) != m) throw UsageError("trajectory: action width mismatch");
        for (Eigen::Index j = 0; j < m; ++j) r.actions(i, j) = s.action[static_cast<std::size_t>(j)];
    }
    return r;
}

double mse(const TrajectoryRecord& record) {
    record.validate();
    if (record.size() == 0) throw UsageError("mse: empty record");
    double sum = 0.0;
    for (std::size_t i = 0; i < record.size(); ++i) {
        const double d = wrap_angle(record.actual[i] - record.goal[i]).value();
        sum += d * d;
    }
    return sum / static_cast<double>(record.size());
}

double latency(const TrajectoryRecord& record) {
    record.validate();
    const std::size_t n = record.size();
    if (n < kMinLatencySamples) throw UsageError("latency: need at least 64 samples");
    const auto [lo, hi] = std::minmax_element(record.goal.begin(), record.goal.end());
    if (*hi - *lo == 0.0) throw UsageError("latency: undefined for a constant goal");

    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> goal_spec;
    std::vector<std::complex<double>> actual_spec;
    fft.fwd(goal_spec, record.goal);
    fft.fwd(actual_spec, record.actual);

    std::size_t dominant = 1;
    for (std::size_t k = 2; k <= n / 2; ++k) {
        if (std::abs(goal_spec[k]) > std::abs(goal_spec[dominant])) dominant = k;
    }
    const double bin_frequency = 2.0 * kPi * static_cast<double>(dominant) / static_cast<double>(n);
    const double phase_diff = std::arg(actual_spec[dominant]) - std::arg(goal_spec[dominant]);
    return wrap_angle(phase_diff).value() / bin_frequency;
}

double saturation(const TrajectoryRecord& record, double threshold) {
    if (record.actions.size() == 0) throw UsageError("saturation: empty action matrix");
    const auto hits = (record.actions.array().abs() >= threshold).count();
    return 100.0 * static_cast<double>(hits) / static_cast<double>(record.actions.size());
}

double energy(const TrajectoryRecord& record) {
    if (record.actions.size() == 0) throw UsageError("energy: empty action matrix");
    return record.actions.cwiseAbs().sum();
}

StepReport step_metrics(const TrajectoryRecord& record, const StepOptions& options) {
    record.validate();
    if (options.magnitude == 0.0) throw UsageError("step_metrics: zero step magnitude");
    if (options.onset < 0 || options.window <= 0) throw UsageError("step_metrics: bad onset/window");
    const auto onset = static_cast<std::size_t>(options.onset);
    const auto window = static_cast<std::size_t>(options.window);
    if (record.size() < onset + window) throw UsageError("step_metrics: record shorter than onset + window");

    const double g = options.magnitude;
    const double sign = g > 0 ? 1.0 : -1.0;
    const std::size_t n = record.size() - onset;
    auto response = [&](std::size_t i) { return record.actual[onset + i]; };

    StepReport rep;
    // Peak: the extremal value in the direction of the step.
    std::size_t peak = 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (sign * response(i) > sign * response(peak)) peak = i;
    }
    rep.peak_time = static_cast<double>(peak);
    rep.overshoot = (response(peak) - g) / g * 100.0;

    double err = 0.0;
    for (std::size_t i = n - window; i < n; ++i) err += response(i) - g;
    rep.steady_state_error = err / static_cast<double>(window) / g * 100.0;

    const double tol = options.band * std::abs(g);
    std::size_t last_outside = n;  // sentinel: none outside
    for (std::size_t i = n; i-- > 0;) {
        if (std::abs(response(i) - g) > tol) {
            last_outside = i;
            break;
        }
    }
    if (last_outside == n) {
        rep.settled = true;
        rep.settling_time = 0.0;
    } else if (last_outside + 1 < n) {
        rep.settled = true;
        rep.settling_time = static_cast<double>(last_outside + 1);
    } else {
        rep.settled = false;
        rep.settling_time = std::numeric_limits<double>::quiet_NaN();
    }
    return rep;
}

SineReport sine_report(const std::vector<TrajectoryRecord>& runs, const std::string& reward, double alpha,
                       double omega, int drops) {
    if (runs.empty()) throw UsageError("sine_report: no runs");
    SineReport r;
    r.reward = reward;
    r.alpha = alpha;
    r.omega = omega;
    r.repeats = static_cast<int>(runs.size());
    r.drops = drops;
    double steps = 0.0;
    int timed = 0;  // a run cut short by a drop can be too short for the DFT
    for (const auto& run : runs) {
        r.mse += mse(run);
        if (run.size() >= kMinLatencySamples) {
            r.latency += latency(run);
            ++timed;
        }
        r.saturation += saturation(run);
        r.energy += energy(run);
        steps += static_cast<double>(run.size());
    }
    const double count = static_cast<double>(runs.size());
    r.mse /= count;
    r.latency = timed > 0 ? r.latency / timed : std::numeric_limits<double>::quiet_NaN();
    r.saturation /= count;
    r.energy /= count;
    r.energy_per_step = r.energy / (steps / count);
    return r;
}

StepRow step_row(const std::vector<TrajectoryRecord>& runs, const std::string& reward, const StepOptions& options,
                 int drops) {
    if (runs.empty()) throw UsageError("step_row: no runs");
    StepRow row;
    row.reward = reward;
    row.repeats = static_cast<int>(runs.size());
    row.drops = drops;
    int settled = 0;
    for (const auto& run : runs) {
        const StepReport s = step_metrics(run, options);
        row.report.peak_time += s.peak_time;
        row.report.overshoot += s.overshoot;
        row.report.steady_state_error += s.steady_state_error;
        if (s.settled) {
            row.report.settling_time += s.settling_time;
            ++settled;
        } else {
            ++row.unsettled;
        }
    }
    const double count = static_cast<double>(runs.size());
    row.report.peak_time /= count;
    row.report.overshoot /= count;
    row.report.steady_state_error /= count;
    row.report.settled = settled > 0;
    row.report.settling_time =
        settled > 0 ? row.report.settling_time / settled : std::numeric_limits<double>::quiet_NaN();
    return row;
}

namespace {

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

nlohmann::json json_number(double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); }

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw RuntimeFault("cannot write report " + path.string());
    out << text;
    if (!out) throw RuntimeFault("failed writing report " + path.string());
}

}  // namespace

std::string format_report(const std::vector<SineReport>& rows, ReportFormat format) {
    if (rows.empty()) throw UsageError("emit_report: no rows");
    if (format == ReportFormat::json) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& r : rows) {
            arr.push_back({{"reward", r.reward},
                           {"alpha", r.alpha},
                           {"omega", r.omega},
                           {"mse_rad2", r.mse},
                           {"latency_steps", r.latency},
                           {"sat_pct", r.saturation},
                           {"energy", r.energy},
                           {"energy_per_step", r.energy_per_step},
                           {"repeats", r.repeats},
                           {"drops", r.drops}});
        }
        return nlohmann::json{{"table", "sinusoid"}, {"rows", arr}}.dump(2) + "\n";
    }
    std::ostringstream os;
    os << "reward,alpha,omega,mse_rad2,latency_steps,sat_pct,energy,energy_per_step,repeats,drops\n";
    for (const auto& r : rows) {
        os << r.reward << ',' << num(r.alpha) << ',' << num(r.omega) << ',' << num(r.mse) << ',' << num(r.latency)
           << ',' << num(r.saturation) << ',' << num(r.energy) << ',' << num(r.energy_per_step) << ',' << r.repeats
           << ',' << r.drops << '\n';
    }
    return os.str();
}

std::string format_report(const std::vector<StepRow>& rows, ReportFormat format) {
    if (rows.empty()) throw UsageError("emit_report: no rows");
    if (format == ReportFormat::json) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& r : rows) {
            arr.push_back({{"reward", r.reward},
                           {"t_p_steps", r.report.peak_time},
                           {"t_st_steps", json_number(r.report.settling_time)},
                           {"os_pct", r.report.overshoot},
                           {"e_ss_pct", r.report.steady_state_error},
                           {"repeats", r.repeats},
                           {"unsettled", r.unsettled},
                           {"drops", r.drops}});
        }
        return nlohmann::json{{"table", "step"}, {"rows", arr}}.dump(2) + "\n";
    }
    std::ostringstream os;
    os << "reward,t_p_steps,t_st_steps,os_pct,e_ss_pct,repeats,unsettled,drops\n";
    for (const auto& r : rows) {
        os << r.reward << ',' << num(r.report.peak_time) << ',' << num(r.report.settling_time) << ','
           << num(r.report.overshoot) << ',' << num(r.report.steady_state_error) << ',' << r.repeats << ','
           << r.unsettled << ',' << r.drops << '\n';
    }
    return os.str();
}

void emit_report(const std::vector<SineReport>& rows, const std::filesystem::path& path, ReportFormat format) {
    write_file(path, format_report(rows, format));
}

void emit_report(const std::vector<StepRow>& rows, const std::filesystem::path& path, ReportFormat format) {
    write_file(path, format_report(rows, format));
}

}  // namespace efold::metrics
