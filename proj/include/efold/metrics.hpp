#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "efold/core.hpp"

namespace efold::metrics {

/// Goal/actual yaw series and the n x m action matrix of one run.
struct TrajectoryRecord {
    double dt = kDefaultDt;
    std::vector<double> goal;
    std::vector<double> actual;
    Eigen::MatrixXd actions;  // n rows (steps) x m columns (actuators)

    std::size_t size() const { return goal.size(); }
    /// Throws UsageError unless the series lengths agree.
    void validate() const;
    static TrajectoryRecord from_log(const EpisodeLog& log);
};

/// (1/n) * sum of squared wrapped differences (rad^2).
double mse(const TrajectoryRecord& record);

inline constexpr std::size_t kMinLatencySamples = 64;

/// Phase lag between actual and goal at the goal's dominant DFT bin,
/// converted to steps. Negative values mean the actual trails the goal.
/// Throws UsageError for n < 64 or a constant goal.
double latency(const TrajectoryRecord& record);

/// Percentage of action entries with |a| >= threshold.
double saturation(const TrajectoryRecord& record, double threshold = 0.99);

/// Sum over steps and actuators of |a_ij|.
double energy(const TrajectoryRecord& record);

struct StepReport {
    double peak_time = 0.0;      // t_p, steps after onset
    double settling_time = 0.0;  // t_st, steps after onset; NaN when unsettled
    bool settled = false;
    double overshoot = 0.0;      // OS, %
    double steady_state_error = 0.0;  // e_ss, %
};

struct StepOptions {
    double magnitude = 1.0;
    int onset = 50;
    double band = 0.05;
    int window = 20;
};

/// Step-response measures over the samples from `onset` on.
/// Throws UsageError if the record is shorter than onset + window.
StepReport step_metrics(const TrajectoryRecord& record, const StepOptions& options = {});

struct SineReport {
    std::string reward;
    double alpha = 0.0;
    double omega = 0.0;
    double mse = 0.0;
    double latency = 0.0;
    double saturation = 0.0;
    double energy = 0.0;
    double energy_per_step = 0.0;
    int repeats = 0;
    int drops = 0;
};

struct StepRow {
    std::string reward;
    StepReport report;
    int repeats = 0;
    int unsettled = 0;
    int drops = 0;
};

SineReport sine_report(const std::vector<TrajectoryRecord>& runs, const std::string& reward, double alpha,
                       double omega, int drops = 0);
StepRow step_row(const std::vector<TrajectoryRecord>& runs, const std::string& reward, const StepOptions& options,
                 int drops = 0);

enum class ReportFormat { csv, json };

/// Sinusoid table: reward,alpha,omega,mse_rad2,latency_steps,sat_pct,energy,energy_per_step,repeats,drops
void emit_report(const std::vector<SineReport>& rows, const std::filesystem::path& path, ReportFormat format);
/// Step table: reward,t_p_steps,t_st_steps,os_pct,e_ss_pct,repeats,unsettled,drops
void emit_report(const std::vector<StepRow>& rows, const std::filesystem::path& path, ReportFormat format);

std::string format_report(const std::vector<SineReport>& rows, ReportFormat format);
std::string format_report(const std::vector<StepRow>& rows, ReportFormat format);

}  // namespace efold::metrics
